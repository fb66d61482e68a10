#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "rde/benchmarks.hpp"

namespace rde {
namespace {

namespace bench = rde::bench;

TEST(BaseFunctions, GlobalOptima) {
  const std::vector<double> zeros10(10, 0.0);
  EXPECT_DOUBLE_EQ(bench::sphere(zeros10), 0.0);
  EXPECT_DOUBLE_EQ(bench::rastrigin(zeros10), 0.0);
  EXPECT_NEAR(bench::ackley(zeros10), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(bench::griewank(zeros10), 0.0);
  EXPECT_DOUBLE_EQ(bench::rosenbrock(std::vector<double>(10, 1.0)), 0.0);
  EXPECT_NEAR(bench::schwefel(std::vector<double>(10, bench::kSchwefelXStar)), 0.0, 1e-12);
}

TEST(BaseFunctions, RastriginHandValue) {
  // 2-D at (1, 0): 20 + (1 - 10 cos 2pi) + (0 - 10) = 1
  EXPECT_NEAR(bench::rastrigin(std::vector<double>{1.0, 0.0}), 1.0, 1e-12);
}

TEST(BaseFunctions, RegistryOptimaAreAttained) {
  for (const std::string& name : bench::suite_function_names()) {
    for (std::size_t dim : {2u, 10u}) {
      ObjectiveFunction fn = bench::make_function(name, dim, 7);
      const double at_star = fn.evaluate(fn.x_star());
      EXPECT_NEAR(at_star, fn.f_star(), 1e-9) << name << " dim " << dim;
      EXPECT_TRUE(fn.bounds().contains(fn.x_star())) << name << " dim " << dim;
    }
  }
}

TEST(Objective, CounterIncrementsOncePerCall) {
  ObjectiveFunction fn = bench::make_base("sphere", 3);
  const std::vector<double> x{1.0, 2.0, 3.0};
  for (int k = 1; k <= 7; ++k) {
    fn.evaluate(x);
    EXPECT_EQ(fn.evaluations(), static_cast<std::uint64_t>(k));
  }
  fn.reset_evaluations();
  EXPECT_EQ(fn.evaluations(), 0u);
}

TEST(Objective, DimensionMismatchIsAUsageError) {
  ObjectiveFunction fn = bench::make_base("sphere", 3);
  EXPECT_THROW(fn.evaluate(std::vector<double>{1.0, 2.0}), UsageError);
}

TEST(Objective, NonFiniteValueIsAnObjectiveError) {
  ObjectiveFunction fn("bad", Bounds::cube(1, -1.0, 1.0), 0.0, {0.0},
                       [](std::span<const double>) { return std::numeric_limits<double>::infinity(); });
  EXPECT_THROW(fn.evaluate(std::vector<double>{0.0}), ObjectiveError);
}

TEST(Transform, IdentityLeavesEvaluationsUnchanged) {
  ObjectiveFunction base = bench::make_base("rastrigin", 4);
  bench::Transform identity;
  identity.shift.assign(4, 0.0);
  ObjectiveFunction wrapped = bench::make_shifted_rotated(base, identity);
  RngStream rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x(4);
    for (double& v : x) v = rng.uniform(-100.0, 100.0);
    EXPECT_DOUBLE_EQ(wrapped.evaluate(x), base.evaluate(x));
  }
}

TEST(Transform, ShiftMovesTheArgmin) {
  ObjectiveFunction base = bench::make_base("rastrigin", 3);
  bench::Transform t;
  t.shift = {10.0, -20.0, 5.0};
  ObjectiveFunction shifted = bench::make_shifted_rotated(base, t);
  EXPECT_NEAR(shifted.evaluate(t.shift), shifted.f_star(), 1e-12);
}

TEST(Transform, MatchesABruteForceOracle) {
  RngStream rng(6);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t dim = 2 + rng.below(6);
    ObjectiveFunction base = bench::make_base("rastrigin", dim);
    bench::Transform t = bench::random_transform(base.bounds(), rng.next_u64(), true, 0.8);
    const auto rotation = t.rotation;
    const auto shift = t.shift;
    ObjectiveFunction wrapped = bench::make_shifted_rotated(base, t);
    std::vector<double> x(dim);
    for (double& v : x) v = rng.uniform(-100.0, 100.0);
    // straightforward multiply-then-evaluate oracle
    std::vector<double> z(dim, 0.0);
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t j = 0; j < dim; ++j) z[r] += rotation[r][j] * (x[j] - shift[j]);
    const double expected = bench::rastrigin(z);
    EXPECT_NEAR(wrapped.evaluate(x), expected, 1e-9 * (1.0 + std::abs(expected)));
  }
}

TEST(Transform, RandomRotationsAreOrthogonal) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    bench::Transform t =
        bench::random_transform(Bounds::cube(12, -100.0, 100.0), seed, true, 0.8);
    EXPECT_LE(bench::orthogonality_defect(t.rotation), 1e-9);
  }
}

TEST(Transform, NonOrthogonalRotationIsRejected) {
  ObjectiveFunction base = bench::make_base("sphere", 2);
  bench::Transform t;
  t.shift = {0.0, 0.0};
  t.rotation = {{1.0, 0.5}, {0.0, 1.0}};
  EXPECT_THROW(bench::make_shifted_rotated(base, t), ConfigurationError);
}

TEST(Transform, SphereIsRotationInvariant) {
  const std::size_t dim = 6;
  ObjectiveFunction base = bench::make_base("sphere", dim);
  bench::Transform rotated = bench::random_transform(base.bounds(), 99, true, 0.8);
  bench::Transform shifted_only;
  shifted_only.shift = rotated.shift;
  ObjectiveFunction a = bench::make_shifted_rotated(base, rotated);
  ObjectiveFunction b = bench::make_shifted_rotated(base, shifted_only);
  RngStream rng(100);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x(dim);
    for (double& v : x) v = rng.uniform(-100.0, 100.0);
    const double va = a.evaluate(x);
    EXPECT_NEAR(va, b.evaluate(x), 1e-9 * (1.0 + std::abs(va)));
  }
}

bench::CompositionComponent shifted_sphere(std::size_t dim, std::vector<double> shift,
                                           double sigma, double bias) {
  ObjectiveFunction base = bench::make_base("sphere", dim);
  bench::Transform t;
  t.shift = std::move(shift);
  return bench::CompositionComponent{bench::make_shifted_rotated(base, t), sigma, bias};
}

TEST(Composition, DominantComponentAtItsCenter) {
  std::vector<bench::CompositionComponent> parts;
  parts.push_back(shifted_sphere(2, {1.0, 1.0}, 1.0, 0.0));
  parts.push_back(shifted_sphere(2, {-1.0, -1.0}, 1.0, 10.0));
  ObjectiveFunction f = bench::make_composition("comp", std::move(parts));
  EXPECT_DOUBLE_EQ(f.evaluate(std::vector<double>{1.0, 1.0}), 0.0);
  EXPECT_DOUBLE_EQ(f.evaluate(std::vector<double>{-1.0, -1.0}), 10.0);
  EXPECT_DOUBLE_EQ(f.f_star(), 0.0);
}

TEST(Composition, IdenticalComponentsCollapseToOnePlusBias) {
  std::vector<bench::CompositionComponent> parts;
  parts.push_back(shifted_sphere(2, {0.5, 0.5}, 2.0, 3.0));
  parts.push_back(shifted_sphere(2, {0.5, 0.5}, 2.0, 3.0));
  ObjectiveFunction f = bench::make_composition("comp", std::move(parts));
  ObjectiveFunction single = shifted_sphere(2, {0.5, 0.5}, 2.0, 3.0).function;
  RngStream rng(101);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x{rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0)};
    const double expected = single.evaluate(x) + 3.0;
    EXPECT_NEAR(f.evaluate(x), expected, 1e-9 * (1.0 + std::abs(expected)));
  }
}

TEST(Composition, HandEvaluatedWeighting) {
  const std::size_t dim = 2;
  std::vector<bench::CompositionComponent> parts;
  parts.push_back(shifted_sphere(dim, {1.0, 0.0}, 1.0, 0.0));
  parts.push_back(shifted_sphere(dim, {-1.0, -2.0}, 2.0, 10.0));
  ObjectiveFunction f = bench::make_composition("comp", std::move(parts));

  const std::vector<double> x{1.0, 1.0};
  const double d1 = 1.0;                // |x - o_1|^2
  const double d2 = 4.0 + 9.0;          // |x - o_2|^2
  const double w1 = std::exp(-d1 / (2.0 * 2.0 * 1.0)) / std::sqrt(d1);
  const double w2 = std::exp(-d2 / (2.0 * 2.0 * 4.0)) / std::sqrt(d2);
  const double f1 = 1.0;                // sphere at distance^2 1
  const double f2 = 13.0;
  const double expected = (w1 * (f1 + 0.0) + w2 * (f2 + 10.0)) / (w1 + w2);
  EXPECT_NEAR(f.evaluate(x), expected, 1e-12);
}

TEST(Composition, MismatchedComponentsAreRejected) {
  std::vector<bench::CompositionComponent> one;
  one.push_back(shifted_sphere(2, {0.0, 0.0}, 1.0, 0.0));
  EXPECT_THROW(bench::make_composition("comp", std::move(one)), ConfigurationError);

  std::vector<bench::CompositionComponent> mixed;
  mixed.push_back(shifted_sphere(2, {0.0, 0.0}, 1.0, 0.0));
  ObjectiveFunction schwefel_base = bench::make_base("schwefel", 2);
  bench::Transform t;
  t.shift = {0.0, 0.0};
  mixed.push_back(bench::CompositionComponent{bench::make_shifted_rotated(schwefel_base, t), 1.0, 0.0});
  EXPECT_THROW(bench::make_composition("comp", std::move(mixed)), ConfigurationError);
}

TEST(Manifest, RoundTripsAndRebuildsTheSameLandscape) {
  std::vector<bench::ManifestRow> rows;
  for (const std::string& name : bench::suite_function_names())
    rows.push_back(bench::manifest_for(name, 5, 11));

  std::stringstream buffer;
  bench::write_suite_manifest(buffer, rows);
  const std::vector<bench::ManifestRow> parsed = bench::read_suite_manifest(buffer);
  ASSERT_EQ(parsed.size(), rows.size());

  RngStream rng(102);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(parsed[i].name, rows[i].name);
    EXPECT_EQ(parsed[i].base, rows[i].base);
    EXPECT_EQ(parsed[i].dim, rows[i].dim);
    EXPECT_EQ(parsed[i].seed, rows[i].seed);
    EXPECT_EQ(parsed[i].f_star, rows[i].f_star);
    EXPECT_EQ(parsed[i].shift, rows[i].shift);

    ObjectiveFunction original = bench::make_function(rows[i].name, rows[i].dim, rows[i].seed);
    ObjectiveFunction rebuilt = bench::make_function(parsed[i].name, parsed[i].dim, parsed[i].seed);
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<double> x(rows[i].dim);
      for (std::size_t j = 0; j < x.size(); ++j)
        x[j] = rng.uniform(original.bounds().low[j], original.bounds().up[j]);
      EXPECT_EQ(original.evaluate(x), rebuilt.evaluate(x));
    }
  }
}

TEST(Registry, UnknownNameIsRejected) {
  EXPECT_THROW(bench::make_function("not_a_function", 5, 1), ConfigurationError);
}

}  // namespace
}  // namespace rde
