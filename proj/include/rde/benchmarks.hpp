#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rde/objective.hpp"
#include "rde/rng.hpp"

namespace rde::bench {

// ---------------------------------------------------------------------------
// Base test functions, textbook definitions, all minimized at f = 0.
// ---------------------------------------------------------------------------

inline double sphere(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

inline double rosenbrock(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = 1.0 - x[i];
    s += 100.0 * a * a + b * b;
  }
  return s;
}

inline double rastrigin(std::span<const double> x) {
  constexpr double two_pi = 6.28318530717958647692;
  double s = 10.0 * static_cast<double>(x.size());
  for (double v : x) s += v * v - 10.0 * std::cos(two_pi * v);
  return s;
}

inline double ackley(std::span<const double> x) {
  constexpr double two_pi = 6.28318530717958647692;
  const double n = static_cast<double>(x.size());
  double sq = 0.0, cs = 0.0;
  for (double v : x) {
    sq += v * v;
    cs += std::cos(two_pi * v);
  }
  return -20.0 * std::exp(-0.2 * std::sqrt(sq / n)) - std::exp(cs / n) + 20.0 +
         std::exp(1.0);
}

inline double griewank(std::span<const double> x) {
  double sum = 0.0, prod = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum += x[i] * x[i] / 4000.0;
    prod *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
  }
  return sum - prod + 1.0;
}

// Per-dimension location of the Schwefel optimum. The offset below is the
// peak of v*sin(sqrt(v)) evaluated at exactly this double, so each term of
// the sum is exactly zero at the optimum.
inline constexpr double kSchwefelXStar = 420.9687474737558;

inline double schwefel_offset() {
  static const double offset = kSchwefelXStar * std::sin(std::sqrt(kSchwefelXStar));
  return offset;
}

inline double schwefel(std::span<const double> x) {
  const double offset = schwefel_offset();
  double s = 0.0;
  for (double v : x) s += offset - v * std::sin(std::sqrt(std::abs(v)));
  return s;
}

inline ObjectiveFunction make_base(std::string_view base, std::size_t dim) {
  if (dim == 0) throw ConfigurationError("make_base: dimension must be positive");
  if (base == "sphere")
    return {"sphere", Bounds::cube(dim, -100.0, 100.0), 0.0,
            std::vector<double>(dim, 0.0), sphere};
  if (base == "rosenbrock")
    return {"rosenbrock", Bounds::cube(dim, -100.0, 100.0), 0.0,
            std::vector<double>(dim, 1.0), rosenbrock};
  if (base == "rastrigin")
    return {"rastrigin", Bounds::cube(dim, -100.0, 100.0), 0.0,
            std::vector<double>(dim, 0.0), rastrigin};
  if (base == "ackley")
    return {"ackley", Bounds::cube(dim, -100.0, 100.0), 0.0,
            std::vector<double>(dim, 0.0), ackley};
  if (base == "griewank")
    return {"griewank", Bounds::cube(dim, -100.0, 100.0), 0.0,
            std::vector<double>(dim, 0.0), griewank};
  if (base == "schwefel")
    return {"schwefel", Bounds::cube(dim, -500.0, 500.0), 0.0,
            std::vector<double>(dim, kSchwefelXStar), schwefel};
  throw ConfigurationError("make_base: unknown base function '" + std::string(base) + "'");
}

// ---------------------------------------------------------------------------
// Shift / rotation transform: f(x) = base(M * (x - o)).
// ---------------------------------------------------------------------------

struct Transform {
  std::vector<double> shift;                    // o
  std::vector<std::vector<double>> rotation;    // row-major M; empty = identity

  bool rotated() const { return !rotation.empty(); }
};

inline std::vector<double> apply_transform(const Transform& t, std::span<const double> x) {
  const std::size_t n = t.shift.size();
  std::vector<double> z(n);
  if (!t.rotated()) {
    for (std::size_t j = 0; j < n; ++j) z[j] = x[j] - t.shift[j];
    return z;
  }
  std::vector<double> d(n);
  for (std::size_t j = 0; j < n; ++j) d[j] = x[j] - t.shift[j];
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    const auto& row = t.rotation[r];
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * d[j];
    z[r] = acc;
  }
  return z;
}

// Largest entry of |M^T M - I|.
inline double orthogonality_defect(const std::vector<std::vector<double>>& m) {
  const std::size_t n = m.size();
  double worst = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      double dot = 0.0;
      for (std::size_t r = 0; r < n; ++r) dot += m[r][a] * m[r][b];
      worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
    }
  }
  return worst;
}

// Seeded transform: shift drawn inside shift_scale * bounds, rotation from
// a Gaussian matrix orthonormalized with two modified Gram-Schmidt passes.
inline Transform random_transform(const Bounds& bounds, std::uint64_t seed,
                                  bool rotate, double shift_scale = 0.8) {
  RngStream rng(seed);
  const std::size_t n = bounds.dim();
  Transform t;
  t.shift.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    t.shift[j] = rng.uniform(shift_scale * bounds.low[j], shift_scale * bounds.up[j]);
  if (!rotate) return t;

  auto& m = t.rotation;
  m.assign(n, std::vector<double>(n));
  for (auto& row : m)
    for (double& v : row) v = rng.normal(0.0, 1.0);
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < i; ++k) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += m[i][j] * m[k][j];
        for (std::size_t j = 0; j < n; ++j) m[i][j] -= dot * m[k][j];
      }
      double norm = 0.0;
      for (double v : m[i]) norm += v * v;
      norm = std::sqrt(norm);
      if (norm < 1e-12)
        throw ConfigurationError("random_transform: degenerate rotation draw");
      for (double& v : m[i]) v /= norm;
    }
  }
  return t;
}

inline ObjectiveFunction make_shifted_rotated(const ObjectiveFunction& base, Transform t) {
  if (t.shift.size() != base.dim())
    throw ConfigurationError("make_shifted_rotated: transform dimension mismatch");
  if (t.rotated()) {
    if (t.rotation.size() != base.dim())
      throw ConfigurationError("make_shifted_rotated: rotation dimension mismatch");
    if (orthogonality_defect(t.rotation) > 1e-9)
      throw ConfigurationError("make_shifted_rotated: rotation matrix is not orthogonal");
  }
  // argmin moves to o + M^T x_star (rows of M are orthonormal).
  const std::size_t n = base.dim();
  std::vector<double> x_star(t.shift);
  if (t.rotated()) {
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t r = 0; r < n; ++r) x_star[j] += t.rotation[r][j] * base.x_star()[r];
  } else {
    for (std::size_t j = 0; j < n; ++j) x_star[j] += base.x_star()[j];
  }
  auto fn = [inner = base.raw(), t = std::move(t)](std::span<const double> x) {
    return inner(apply_transform(t, x));
  };
  return {base.name(), base.bounds(), base.f_star(), std::move(x_star), std::move(fn)};
}

// ---------------------------------------------------------------------------
// Composition: distance-weighted blend of component functions, weight of
// component i proportional to exp(-|x-o_i|^2 / (2 n sigma_i^2)) / |x-o_i|.
// ---------------------------------------------------------------------------

struct CompositionComponent {
  ObjectiveFunction function;
  double sigma;
  double bias;
};

inline ObjectiveFunction make_composition(std::string name,
                                          std::vector<CompositionComponent> components) {
  if (components.size() < 2)
    throw ConfigurationError("make_composition: need at least two components");
  const Bounds bounds = components.front().function.bounds();
  for (const auto& c : components) {
    if (!(c.function.bounds() == bounds))
      throw ConfigurationError("make_composition: components must share bounds");
    if (!(c.sigma > 0.0))
      throw ConfigurationError("make_composition: sigma must be positive");
  }
  const std::size_t n = bounds.dim();

  struct Part {
    ObjectiveFunction::Fn fn;
    std::vector<double> center;
    double sigma;
    double bias;
  };
  std::vector<Part> parts;
  parts.reserve(components.size());
  double f_star = std::numeric_limits<double>::infinity();
  std::vector<double> x_star;
  for (auto& c : components) {
    std::vector<double> center(c.function.x_star().begin(), c.function.x_star().end());
    const double at_center = c.function.raw()(center) + c.bias;
    if (at_center < f_star) {
      f_star = at_center;
      x_star = center;
    }
    parts.push_back(Part{c.function.raw(), std::move(center), c.sigma, c.bias});
  }

  auto fn = [parts = std::move(parts), n](std::span<const double> x) {
    const std::size_t k = parts.size();
    std::vector<double> w(k);
    std::size_t nearest = 0;
    double nearest_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double d = x[j] - parts[i].center[j];
        d2 += d * d;
      }
      if (d2 < nearest_d2) {
        nearest_d2 = d2;
        nearest = i;
      }
      if (d2 < 1e-24) return parts[i].fn(x) + parts[i].bias;  // on a center: that component dominates
      w[i] = std::exp(-d2 / (2.0 * static_cast<double>(n) * parts[i].sigma * parts[i].sigma)) /
             std::sqrt(d2);
    }
    double wsum = 0.0;
    for (double v : w) wsum += v;
    // far from every center the weights underflow; fall back to the nearest
    if (!(wsum > 0.0)) return parts[nearest].fn(x) + parts[nearest].bias;
    double value = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      value += (w[i] / wsum) * (parts[i].fn(x) + parts[i].bias);
    return value;
  };
  return {std::move(name), bounds, f_star, std::move(x_star), std::move(fn)};
}

// ---------------------------------------------------------------------------
// Suite registry. Every entry is fully determined by (name, dim, seed), so
// a manifest row is enough to rebuild the exact landscape.
// ---------------------------------------------------------------------------

struct ManifestRow {
  std::string name;
  std::string base;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  double f_star = 0.0;
  std::vector<double> shift;  // primary shift; zeros for plain bases
};

inline const std::vector<std::string>& suite_function_names() {
  static const std::vector<std::string> names = {
      "sphere",     "rosenbrock",    "rastrigin",  "ackley",
      "griewank",   "schwefel",      "sr_sphere",  "sr_rosenbrock",
      "sr_rastrigin", "sr_ackley",   "sr_griewank", "s_schwefel",
      "composition2", "composition3"};
  return names;
}

namespace detail {

struct Built {
  ObjectiveFunction function;
  ManifestRow row;
};

inline Built build_suite_function(std::string_view name, std::size_t dim, std::uint64_t seed) {
  auto finish = [&](ObjectiveFunction fn, std::string base, std::vector<double> shift) {
    fn.set_name(std::string(name));
    ManifestRow row{std::string(name), std::move(base), dim, seed, fn.f_star(), std::move(shift)};
    return Built{std::move(fn), std::move(row)};
  };

  auto shifted_rotated = [&](std::string_view base) {
    ObjectiveFunction fn = make_base(base, dim);
    Transform t = random_transform(fn.bounds(), derive_seed(seed, name), true, 0.8);
    std::vector<double> shift = t.shift;
    return finish(make_shifted_rotated(fn, std::move(t)), std::string(base), std::move(shift));
  };

  auto composition_component = [&](std::string_view base, std::string_view tag,
                                   double sigma, double bias) {
    ObjectiveFunction fn = make_base(base, dim);
    Transform t = random_transform(fn.bounds(), derive_seed(seed, std::string(name) + "/" + std::string(tag)),
                                   true, 0.8);
    return CompositionComponent{make_shifted_rotated(fn, std::move(t)), sigma, bias};
  };

  static const std::vector<std::string> plain = {"sphere",   "rosenbrock", "rastrigin",
                                                 "ackley",   "griewank",   "schwefel"};
  if (std::find(plain.begin(), plain.end(), name) != plain.end())
    return finish(make_base(name, dim), std::string(name), std::vector<double>(dim, 0.0));

  if (name == "sr_sphere") return shifted_rotated("sphere");
  if (name == "sr_rosenbrock") return shifted_rotated("rosenbrock");
  if (name == "sr_rastrigin") return shifted_rotated("rastrigin");
  if (name == "sr_ackley") return shifted_rotated("ackley");
  if (name == "sr_griewank") return shifted_rotated("griewank");
  if (name == "s_schwefel") {
    ObjectiveFunction fn = make_base("schwefel", dim);
    // keep the shifted optimum inside [-500, 500]
    Transform t = random_transform(fn.bounds(), derive_seed(seed, name), false, 0.15);
    std::vector<double> shift = t.shift;
    return finish(make_shifted_rotated(fn, std::move(t)), "schwefel", std::move(shift));
  }
  if (name == "composition2") {
    // equal reach for both basins; only the bias separates them
    std::vector<CompositionComponent> parts;
    parts.push_back(composition_component("rastrigin", "c0", 30.0, 0.0));
    parts.push_back(composition_component("rastrigin", "c1", 30.0, 100.0));
    std::vector<double> shift(parts.front().function.x_star().begin(),
                              parts.front().function.x_star().end());
    return finish(make_composition(std::string(name), std::move(parts)), "composition",
                  std::move(shift));
  }
  if (name == "composition3") {
    std::vector<CompositionComponent> parts;
    parts.push_back(composition_component("rastrigin", "c0", 30.0, 0.0));
    parts.push_back(composition_component("rastrigin", "c1", 30.0, 100.0));
    parts.push_back(composition_component("rastrigin", "c2", 30.0, 200.0));
    std::vector<double> shift(parts.front().function.x_star().begin(),
                              parts.front().function.x_star().end());
    return finish(make_composition(std::string(name), std::move(parts)), "composition",
                  std::move(shift));
  }

  std::string known;
  for (const auto& fn_name : suite_function_names()) known += " " + fn_name;
  throw ConfigurationError("unknown suite function '" + std::string(name) + "'; known:" + known);
}

}  // namespace detail

inline ObjectiveFunction make_function(std::string_view name, std::size_t dim, std::uint64_t seed) {
  return detail::build_suite_function(name, dim, seed).function;
}

inline ManifestRow manifest_for(std::string_view name, std::size_t dim, std::uint64_t seed) {
  return detail::build_suite_function(name, dim, seed).row;
}

namespace detail {

inline std::string shortest_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace detail

// One record per function: name, base, dim, seed, f_star, then the shift
// components as trailing columns.
inline void write_suite_manifest(std::ostream& out, std::span<const ManifestRow> rows) {
  out << "name,base,dim,seed,f_star,shift...\n";
  for (const auto& r : rows) {
    out << r.name << ',' << r.base << ',' << r.dim << ',' << r.seed << ','
        << detail::shortest_double(r.f_star);
    for (double s : r.shift) out << ',' << detail::shortest_double(s);
    out << '\n';
  }
}

inline std::vector<ManifestRow> read_suite_manifest(std::istream& in) {
  std::vector<ManifestRow> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {  // header
      first = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 5)
      throw ConfigurationError("suite manifest: malformed row '" + line + "'");
    ManifestRow r;
    r.name = fields[0];
    r.base = fields[1];
    r.dim = std::stoul(fields[2]);
    r.seed = std::stoull(fields[3]);
    r.f_star = std::stod(fields[4]);
    for (std::size_t i = 5; i < fields.size(); ++i) r.shift.push_back(std::stod(fields[i]));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace rde::bench
