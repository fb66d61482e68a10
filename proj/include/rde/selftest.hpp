#pragma once

#include <functional>
#include <ostream>
#include <sstream>
#include <vector>

#include "rde/benchmarks.hpp"
#include "rde/redistribution.hpp"
#include "rde/restart.hpp"
#include "rde/stats.hpp"

namespace rde {

// Built-in oracle suite behind `rde selftest`: quick independent checks of
// the formula-level operations, runnable on any installation.
inline bool run_selftest(std::ostream& out) {
  struct Check {
    const char* name;
    std::function<bool()> fn;
  };

  RngStream rng(20240601);

  auto random_pop = [&rng](std::size_t np, std::size_t dim) {
    Bounds b = Bounds::cube(dim, -100.0, 100.0);
    return random_population(np, b, rng);
  };

  const std::vector<Check> checks = {
      {"population center matches a sort-based median",
       [&] {
         for (int rep = 0; rep < 200; ++rep) {
           Population pop = random_pop(1 + rng.below(12), 1 + rng.below(6));
           const auto center = population_center(pop);
           for (std::size_t j = 0; j < pop.bounds.dim(); ++j) {
             std::vector<double> column;
             for (const auto& m : pop.members) column.push_back(m.genome[j]);
             std::sort(column.begin(), column.end());
             const std::size_t np = column.size();
             const double expected = np % 2 == 1
                                         ? column[np / 2]
                                         : 0.5 * (column[np / 2 - 1] + column[np / 2]);
             if (std::abs(center[j] - expected) > 1e-12) return false;
           }
         }
         return true;
       }},
      {"diversity matches the direct normalized-deviation sum",
       [&] {
         for (int rep = 0; rep < 200; ++rep) {
           Population pop = random_pop(1 + rng.below(12), 1 + rng.below(6));
           const auto center = population_center(pop);
           double total = 0.0;
           for (const auto& m : pop.members)
             for (std::size_t j = 0; j < pop.bounds.dim(); ++j)
               total += std::abs(m.genome[j] - center[j]) / pop.bounds.range(j);
           const double expected = total / static_cast<double>(pop.size());
           if (std::abs(diversity(pop) - expected) > 1e-12) return false;
         }
         return true;
       }},
      {"opposite vector is the box reflection and an involution",
       [&] {
         Bounds b = Bounds::cube(5, -100.0, 100.0);
         for (int rep = 0; rep < 200; ++rep) {
           std::vector<double> x(5);
           for (double& v : x) v = rng.uniform(-100.0, 100.0);
           const auto o = opposite_vector(x, b);
           const auto back = opposite_vector(o, b);
           for (std::size_t j = 0; j < x.size(); ++j) {
             if (std::abs(o[j] - (-x[j])) > 1e-9) return false;
             if (std::abs(back[j] - x[j]) > 1e-9) return false;
           }
         }
         return true;
       }},
      {"bound repair yields feasible vectors and is idempotent",
       [&] {
         Bounds b = Bounds::cube(4, -10.0, 10.0);
         for (int rep = 0; rep < 200; ++rep) {
           std::vector<double> parent(4), child(4);
           for (double& v : parent) v = rng.uniform(-10.0, 10.0);
           for (double& v : child) v = rng.uniform(-30.0, 30.0);
           const auto repaired = repair_bounds(child, parent, b);
           if (!b.contains(repaired)) return false;
           if (repair_bounds(repaired, parent, b) != repaired) return false;
         }
         return true;
       }},
      {"population-size schedule hits its endpoints and never grows",
       [&] {
         for (int rep = 0; rep < 50; ++rep) {
           const std::size_t np_min = 4 + rng.below(8);
           const std::size_t np_init = np_min + rng.below(200);
           const std::uint64_t mfes = 1000 + rng.below(100000);
           if (lpsr_target_size(0, mfes, np_init, np_min) != np_init) return false;
           if (lpsr_target_size(mfes, mfes, np_init, np_min) != np_min) return false;
           std::size_t prev = np_init;
           for (std::uint64_t fes = 0; fes <= mfes; fes += mfes / 37 + 1) {
             const std::size_t now = lpsr_target_size(fes, mfes, np_init, np_min);
             if (now > prev) return false;
             prev = now;
           }
         }
         return true;
       }},
      {"rank-sum test reproduces known exact p-values",
       [&] {
         const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
         const auto r = wilcoxon_rank_sum(a, b);
         if (!r.exact || std::abs(r.p_value - 0.1) > 1e-15) return false;
         std::vector<double> lo(8), hi(8);
         std::iota(lo.begin(), lo.end(), 1.0);
         std::iota(hi.begin(), hi.end(), 9.0);
         const auto r2 = wilcoxon_rank_sum(lo, hi);
         if (!r2.exact || std::abs(r2.p_value - 2.0 / 12870.0) > 1e-18) return false;
         if (r2.decision != Decision::Win) return false;
         const auto r3 = wilcoxon_rank_sum(a, a);
         return r3.p_value == 1.0 && r3.decision == Decision::Tie;
       }},
      {"changed operators consume no evaluations",
       [&] {
         ObjectiveFunction objective = bench::make_base("rastrigin", 5);
         RngStream run_rng(7);
         Population pop = random_population(20, objective.bounds(), run_rng);
         evaluate_missing(pop, objective);
         const std::uint64_t before = objective.evaluations();
         for (int g = 0; g < 25; ++g) pop = changed_generation(pop, run_rng);
         return objective.evaluations() == before;
       }},
      {"identical seeds give identical runs",
       [&] {
         auto once = [] {
           ObjectiveFunction objective = bench::make_function("sr_rastrigin", 5, 3);
           EngineState engine(EngineConfig::classic_de(20));
           RedistParams params;
           params.trigger_generations = 10;
           params.diversity_threshold = 0.05;
           return run_irv(std::move(engine), std::move(objective), params, 4000, RngStream(99));
         };
         const RunRecord r1 = once();
         const RunRecord r2 = once();
         if (r1.samples.size() != r2.samples.size()) return false;
         for (std::size_t i = 0; i < r1.samples.size(); ++i)
           if (r1.samples[i].fes != r2.samples[i].fes ||
               r1.samples[i].best_error != r2.samples[i].best_error)
             return false;
         return r1.final_error == r2.final_error;
       }},
  };

  bool all_ok = true;
  for (const Check& check : checks) {
    bool ok = false;
    std::string detail;
    try {
      ok = check.fn();
    } catch (const std::exception& e) {
      detail = e.what();
    }
    out << (ok ? "ok   - " : "FAIL - ") << check.name;
    if (!detail.empty()) out << " (" << detail << ")";
    out << '\n';
    all_ok = all_ok && ok;
  }
  out << (all_ok ? "selftest passed\n" : "selftest FAILED\n");
  return all_ok;
}

}  // namespace rde
