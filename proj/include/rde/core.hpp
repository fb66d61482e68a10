#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rde/rng.hpp"

namespace rde {

// Caller broke an operation contract (empty population, out-of-bounds
// input, unevaluated individual, ...).
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Invalid algorithm or experiment configuration.
struct ConfigurationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Box constraints of the search space.
struct Bounds {
  std::vector<double> low;
  std::vector<double> up;

  Bounds(std::vector<double> low_in, std::vector<double> up_in)
      : low(std::move(low_in)), up(std::move(up_in)) {
    if (low.empty() || low.size() != up.size())
      throw UsageError("Bounds: limit arrays must be non-empty and equal in length");
    for (std::size_t j = 0; j < low.size(); ++j)
      if (!(low[j] < up[j]))
        throw UsageError("Bounds: require low < up in every dimension");
  }

  static Bounds cube(std::size_t dim, double lo, double hi) {
    return Bounds(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
  }

  std::size_t dim() const { return low.size(); }

  double range(std::size_t j) const { return up[j] - low[j]; }

  bool contains(std::span<const double> x) const {
    if (x.size() != dim()) return false;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (x[j] < low[j] || x[j] > up[j]) return false;
    return true;
  }

  friend bool operator==(const Bounds& a, const Bounds& b) {
    return a.low == b.low && a.up == b.up;
  }
};

// Decision vector plus cached fitness; absent until evaluated.
struct Individual {
  std::vector<double> genome;
  std::optional<double> fitness;

  bool evaluated() const { return fitness.has_value(); }
};

// Ordered multiset of individuals sharing one set of bounds.
struct Population {
  std::vector<Individual> members;
  Bounds bounds;
  std::uint64_t generation = 0;

  std::size_t size() const { return members.size(); }
};

inline Population random_population(std::size_t np, const Bounds& bounds, RngStream& rng) {
  if (np == 0) throw UsageError("random_population: population size must be positive");
  Population pop{{}, bounds, 0};
  pop.members.reserve(np);
  const std::size_t n = bounds.dim();
  for (std::size_t i = 0; i < np; ++i) {
    std::vector<double> genome(n);
    for (std::size_t j = 0; j < n; ++j)
      genome[j] = bounds.low[j] + rng.uniform01() * bounds.range(j);
    pop.members.push_back(Individual{std::move(genome), std::nullopt});
  }
  return pop;
}

// Index of the best evaluated member; ties resolve to the lowest index.
inline std::size_t best_index(const Population& pop) {
  std::size_t best = pop.size();
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const auto& f = pop.members[i].fitness;
    if (f && *f < best_value) {
      best = i;
      best_value = *f;
    }
  }
  if (best == pop.size()) throw UsageError("best_index: no evaluated member");
  return best;
}

inline double best_fitness(const Population& pop) {
  return *pop.members[best_index(pop)].fitness;
}

// Per-dimension median of the population. For an even member count the
// center is the midpoint of the two central order statistics.
inline std::vector<double> population_center(const Population& pop) {
  if (pop.members.empty()) throw UsageError("population_center: empty population");
  const std::size_t np = pop.size();
  const std::size_t n = pop.bounds.dim();
  std::vector<double> column(np);
  std::vector<double> center(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < np; ++i) column[i] = pop.members[i].genome[j];
    const auto mid = column.begin() + static_cast<std::ptrdiff_t>(np / 2);
    std::nth_element(column.begin(), mid, column.end());
    if (np % 2 == 1) {
      center[j] = *mid;
    } else {
      const double hi = *mid;
      const double lo = *std::max_element(column.begin(), mid);
      center[j] = 0.5 * (lo + hi);
    }
  }
  return center;
}

// Mean normalized Manhattan distance from the members to the population
// center. Zero iff all genomes are identical; at most dim/2.
inline double diversity(const Population& pop) {
  if (pop.members.empty()) throw UsageError("diversity: empty population");
  const std::vector<double> center = population_center(pop);
  const std::size_t n = pop.bounds.dim();
  double total = 0.0;
  for (const Individual& m : pop.members)
    for (std::size_t j = 0; j < n; ++j)
      total += std::abs(m.genome[j] - center[j]) / pop.bounds.range(j);
  return total / static_cast<double>(pop.size());
}

// Component-wise reflection through the box center: up + low - x.
inline std::vector<double> opposite_vector(std::span<const double> x, const Bounds& bounds) {
  if (!bounds.contains(x))
    throw UsageError("opposite_vector: input outside bounds");
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    out[j] = std::clamp(bounds.up[j] + bounds.low[j] - x[j], bounds.low[j], bounds.up[j]);
  return out;
}

// Violated components are reset to the midpoint between the parent value
// and the violated limit; feasible components pass through unchanged.
inline std::vector<double> repair_bounds(std::vector<double> child,
                                         std::span<const double> parent,
                                         const Bounds& bounds) {
  if (child.size() != bounds.dim() || parent.size() != bounds.dim())
    throw UsageError("repair_bounds: dimension mismatch");
  for (std::size_t j = 0; j < child.size(); ++j) {
    if (child[j] < bounds.low[j])
      child[j] = 0.5 * (parent[j] + bounds.low[j]);
    else if (child[j] > bounds.up[j])
      child[j] = 0.5 * (parent[j] + bounds.up[j]);
  }
  return child;
}

}  // namespace rde
