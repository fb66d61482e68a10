#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rde/core.hpp"

namespace rde {

// Objective evaluation failed (non-finite value or a user callback threw).
struct ObjectiveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A named minimization target with known optimum and a budget counter.
// The counter belongs to the run that owns this instance; copies start
// from the copied count and are reset by the run drivers.
class ObjectiveFunction {
 public:
  using Fn = std::function<double(std::span<const double>)>;

  ObjectiveFunction(std::string name, Bounds bounds, double f_star,
                    std::vector<double> x_star, Fn fn)
      : name_(std::move(name)),
        bounds_(std::move(bounds)),
        f_star_(f_star),
        x_star_(std::move(x_star)),
        fn_(std::move(fn)) {
    if (x_star_.size() != bounds_.dim())
      throw ConfigurationError("ObjectiveFunction '" + name_ + "': x_star dimension mismatch");
    if (!fn_) throw ConfigurationError("ObjectiveFunction '" + name_ + "': missing callable");
  }

  double evaluate(std::span<const double> x) {
    if (x.size() != bounds_.dim())
      throw UsageError("objective '" + name_ + "': dimension mismatch");
    ++evaluations_;
    const double value = fn_(x);
    if (!std::isfinite(value))
      throw ObjectiveError("objective '" + name_ + "' returned a non-finite value");
    return value;
  }

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }
  const Bounds& bounds() const { return bounds_; }
  std::size_t dim() const { return bounds_.dim(); }
  double f_star() const { return f_star_; }
  std::span<const double> x_star() const { return x_star_; }
  const Fn& raw() const { return fn_; }

  std::uint64_t evaluations() const { return evaluations_; }
  void reset_evaluations() { evaluations_ = 0; }

 private:
  std::string name_;
  Bounds bounds_;
  double f_star_;
  std::vector<double> x_star_;
  Fn fn_;
  std::uint64_t evaluations_ = 0;
};

// Evaluates every member that has no cached fitness; returns how many
// evaluations were spent.
inline std::size_t evaluate_missing(Population& pop, ObjectiveFunction& objective) {
  std::size_t spent = 0;
  for (Individual& m : pop.members) {
    if (!m.fitness) {
      m.fitness = objective.evaluate(m.genome);
      ++spent;
    }
  }
  return spent;
}

}  // namespace rde
