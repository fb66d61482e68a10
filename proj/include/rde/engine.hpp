#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rde/core.hpp"
#include "rde/objective.hpp"

namespace rde {

enum class Strategy { Rand1, CurrentToPBest };
enum class CrossoverKind { Binomial, Exponential };

struct LpsrSettings {
  std::size_t np_init = 100;
  std::size_t np_min = 4;
};

struct EngineConfig {
  Strategy strategy = Strategy::Rand1;
  CrossoverKind crossover = CrossoverKind::Binomial;
  std::size_t np = 100;       // population size (initial size when LPSR is on)
  double f = 0.5;             // fixed scale factor, ignored when adaptive
  double cr = 0.9;            // fixed crossover rate, ignored when adaptive
  bool adaptive = false;      // success-history parameter sampling
  double p = 0.11;            // greediness fraction for current-to-pbest
  std::size_t archive_cap = 0;
  std::optional<LpsrSettings> lpsr;
  bool preserve_lpsr_on_restart = false;

  void validate() const {
    std::vector<std::string> issues;
    if (np < 4) issues.push_back("np must be at least 4");
    if (!adaptive) {
      if (!(f > 0.0 && f <= 1.2)) issues.push_back("f must lie in (0, 1.2]");
      if (!(cr >= 0.0 && cr <= 1.0)) issues.push_back("cr must lie in [0, 1]");
    }
    if (strategy == Strategy::CurrentToPBest && !(p > 0.0 && p <= 1.0))
      issues.push_back("p must lie in (0, 1]");
    if (lpsr) {
      if (lpsr->np_min < 4) issues.push_back("lpsr np_min must be at least 4");
      if (lpsr->np_min > lpsr->np_init) issues.push_back("lpsr np_min must not exceed np_init");
      if (lpsr->np_init != np) issues.push_back("lpsr np_init must equal np");
    }
    if (!issues.empty()) {
      std::string msg = "engine configuration:";
      for (const auto& s : issues) msg += " " + s + ";";
      throw ConfigurationError(msg);
    }
  }

  static EngineConfig classic_de(std::size_t np = 100, double f = 0.5, double cr = 0.9) {
    EngineConfig cfg;
    cfg.strategy = Strategy::Rand1;
    cfg.crossover = CrossoverKind::Binomial;
    cfg.np = np;
    cfg.f = f;
    cfg.cr = cr;
    return cfg;
  }

  // Success-history adaptive current-to-pbest with archive and LPSR.
  static EngineConfig adaptive_lshade(std::size_t np_init = 100, std::size_t np_min = 4) {
    EngineConfig cfg;
    cfg.strategy = Strategy::CurrentToPBest;
    cfg.crossover = CrossoverKind::Binomial;
    cfg.np = np_init;
    cfg.adaptive = true;
    cfg.p = 0.11;
    cfg.archive_cap = static_cast<std::size_t>(std::lround(2.6 * static_cast<double>(np_init)));
    cfg.lpsr = LpsrSettings{np_init, np_min};
    return cfg;
  }
};

// Ring of historical parameter means plus the archive of replaced parents.
struct AdaptationMemory {
  std::vector<double> m_f;
  std::vector<double> m_cr;
  std::size_t cursor = 0;
  std::vector<std::vector<double>> archive;
  std::size_t archive_cap = 0;
};

struct Success {
  double f = 0.0;
  double cr = 0.0;
  double improvement = 0.0;
};

// Writes the improvement-weighted Lehmer mean of F and arithmetic mean of
// CR at the cursor, then advances it. No successes, no change.
inline void update_success_memory(AdaptationMemory& memory, std::span<const Success> successes) {
  if (successes.empty()) return;
  double total = 0.0;
  for (const Success& s : successes) total += std::max(s.improvement, 0.0);
  double f_num = 0.0, f_den = 0.0, cr_num = 0.0, wsum = 0.0;
  for (const Success& s : successes) {
    const double w = total > 0.0 ? std::max(s.improvement, 0.0) : 1.0;
    f_num += w * s.f * s.f;
    f_den += w * s.f;
    cr_num += w * s.cr;
    wsum += w;
  }
  if (f_den <= 0.0 || wsum <= 0.0) return;
  memory.m_f[memory.cursor] = f_num / f_den;
  memory.m_cr[memory.cursor] = cr_num / wsum;
  memory.cursor = (memory.cursor + 1) % memory.m_f.size();
}

// Linear population-size schedule; exact at both endpoints.
inline std::size_t lpsr_target_size(std::uint64_t fes, std::uint64_t mfes,
                                    std::size_t np_init, std::size_t np_min) {
  if (mfes == 0 || fes > mfes) throw UsageError("lpsr_target_size: require 0 <= fes <= mfes, mfes > 0");
  if (np_min > np_init) throw UsageError("lpsr_target_size: np_min must not exceed np_init");
  const long double slope_num =
      static_cast<long double>(np_min) - static_cast<long double>(np_init);
  const long double value = static_cast<long double>(np_init) +
                            slope_num * static_cast<long double>(fes) /
                                static_cast<long double>(mfes);
  return static_cast<std::size_t>(llroundl(value));
}

// v = x_i + F * (x_r1 - x_r2), r1 != r2 != i, repaired against x_i.
inline std::vector<double> mutate_rand1(const Population& pop, std::size_t i, double f,
                                        RngStream& rng) {
  const std::size_t np = pop.size();
  if (np < 4) throw ConfigurationError("mutate_rand1: population size must be at least 4");
  if (i >= np) throw UsageError("mutate_rand1: index out of range");
  std::size_t r1 = rng.below(np);
  while (r1 == i) r1 = rng.below(np);
  std::size_t r2 = rng.below(np);
  while (r2 == i || r2 == r1) r2 = rng.below(np);
  const auto& xi = pop.members[i].genome;
  const auto& x1 = pop.members[r1].genome;
  const auto& x2 = pop.members[r2].genome;
  std::vector<double> v(xi.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = xi[j] + f * (x1[j] - x2[j]);
  return repair_bounds(std::move(v), xi, pop.bounds);
}

// Indices of the ceil(p * NP) best members; ties resolve by lower index.
inline std::vector<std::size_t> pbest_pool(const Population& pop, double p) {
  const std::size_t np = pop.size();
  if (!(p > 0.0)) throw ConfigurationError("pbest_pool: empty pbest pool (p must be positive)");
  std::size_t pool = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(np) - 1e-9));
  pool = std::clamp<std::size_t>(pool, 1, np);
  std::vector<std::size_t> order(np);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(pool), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double fa = *pop.members[a].fitness;
                      const double fb = *pop.members[b].fitness;
                      return fa != fb ? fa < fb : a < b;
                    });
  order.resize(pool);
  return order;
}

// v = x_i + F * (x_pbest - x_i) + F * (x_r1 - x_r2); r2 may come from the
// archive. Repaired against x_i.
inline std::vector<double> mutate_current_to_pbest(const Population& pop,
                                                   const AdaptationMemory& memory,
                                                   std::size_t i, double f, double p,
                                                   RngStream& rng) {
  const std::size_t np = pop.size();
  if (np < 4) throw ConfigurationError("mutate_current_to_pbest: population size must be at least 4");
  if (i >= np) throw UsageError("mutate_current_to_pbest: index out of range");
  for (const auto& m : pop.members)
    if (!m.fitness) throw UsageError("mutate_current_to_pbest: population must be evaluated");

  const std::vector<std::size_t> pool = pbest_pool(pop, p);
  const std::size_t pbest = pool[rng.below(pool.size())];
  std::size_t r1 = rng.below(np);
  while (r1 == i) r1 = rng.below(np);
  const std::size_t extended = np + memory.archive.size();
  std::size_t r2 = rng.below(extended);
  while (r2 < np && (r2 == i || r2 == r1)) r2 = rng.below(extended);

  const auto& xi = pop.members[i].genome;
  const auto& xp = pop.members[pbest].genome;
  const auto& x1 = pop.members[r1].genome;
  const std::vector<double>& x2 =
      r2 < np ? pop.members[r2].genome : memory.archive[r2 - np];
  std::vector<double> v(xi.size());
  for (std::size_t j = 0; j < v.size(); ++j)
    v[j] = xi[j] + f * (xp[j] - xi[j]) + f * (x1[j] - x2[j]);
  return repair_bounds(std::move(v), xi, pop.bounds);
}

// Binomial crossover with one uniformly chosen dimension forced from the
// mutant, so the trial always differs from the target somewhere.
inline std::vector<double> crossover_binomial(std::span<const double> target,
                                              std::span<const double> mutant, double cr,
                                              RngStream& rng) {
  if (target.size() != mutant.size()) throw UsageError("crossover_binomial: length mismatch");
  const std::size_t n = target.size();
  const std::size_t j_rand = rng.below(n);
  std::vector<double> trial(n);
  for (std::size_t j = 0; j < n; ++j)
    trial[j] = (j == j_rand || rng.uniform01() <= cr) ? mutant[j] : target[j];
  return trial;
}

// Classic single-segment exponential crossover: copy a contiguous block of
// the mutant starting at a random dimension, extended while draws pass.
inline std::vector<double> crossover_exponential(std::span<const double> target,
                                                 std::span<const double> mutant, double cr,
                                                 RngStream& rng) {
  if (target.size() != mutant.size()) throw UsageError("crossover_exponential: length mismatch");
  const std::size_t n = target.size();
  std::vector<double> trial(target.begin(), target.end());
  std::size_t j = rng.below(n);
  std::size_t copied = 0;
  do {
    trial[j] = mutant[j];
    j = (j + 1) % n;
    ++copied;
  } while (copied < n && rng.uniform01() <= cr);
  return trial;
}

// Smaller fitness wins; ties keep the trial.
inline const Individual& select_greedy(const Individual& target, const Individual& trial) {
  if (!target.fitness || !trial.fitness)
    throw UsageError("select_greedy: both individuals must be evaluated");
  return *trial.fitness <= *target.fitness ? trial : target;
}

struct GenerationReport {
  double best_fitness = 0.0;
  std::uint64_t fes_delta = 0;
  std::vector<Success> successes;
  std::size_t np_after = 0;
};

// One DE engine instance: strategy configuration plus adaptive memory and
// the (rebasable) LPSR schedule. Single owner per run.
class EngineState {
 public:
  static constexpr std::size_t kHistoryLength = 6;

  explicit EngineState(EngineConfig config) : config_(std::move(config)) {
    config_.validate();
    reset_adaptation();
  }

  const EngineConfig& config() const { return config_; }
  AdaptationMemory& memory() { return memory_; }
  const AdaptationMemory& memory() const { return memory_; }

  std::size_t initial_np() const { return config_.np; }
  bool has_lpsr() const { return config_.lpsr.has_value(); }

  void start_run(std::uint64_t mfes) {
    mfes_ = mfes;
    reset_adaptation();
    lpsr_np_start_ = initial_np();
    lpsr_origin_ = 0;
  }

  void reset_adaptation() {
    memory_.m_f.assign(kHistoryLength, 0.5);
    memory_.m_cr.assign(kHistoryLength, 0.5);
    memory_.cursor = 0;
    memory_.archive.clear();
    memory_.archive_cap = config_.archive_cap;
  }

  // Target size of the current schedule segment. The segment runs from
  // (origin, np_start) to (mfes, np_min) and is rebased after restarts and
  // after a redistribution recovery.
  std::size_t lpsr_target(std::uint64_t fes) const {
    const LpsrSettings& l = *config_.lpsr;
    if (lpsr_origin_ >= mfes_) return l.np_min;
    const std::uint64_t span = mfes_ - lpsr_origin_;
    const std::uint64_t used = std::min(fes > lpsr_origin_ ? fes - lpsr_origin_ : 0, span);
    return lpsr_target_size(used, span, lpsr_np_start_, l.np_min);
  }

  void rebase_lpsr(std::uint64_t fes, std::size_t np_now) {
    lpsr_np_start_ = std::max(np_now, config_.lpsr->np_min);
    lpsr_origin_ = std::min(fes, mfes_);
  }

  // Complete-restart hook: adaptive state always resets; the LPSR schedule
  // restarts from np_init unless configured to keep its progress.
  void on_restart(std::uint64_t fes) {
    reset_adaptation();
    if (has_lpsr() && !config_.preserve_lpsr_on_restart) rebase_lpsr(fes, config_.lpsr->np_init);
  }

  // (F, CR) for one trial: fixed values, or sampled around a random history
  // row (Cauchy for F, truncated to (0, 1]; clamped normal for CR).
  std::pair<double, double> sample_parameters(RngStream& rng) {
    if (!config_.adaptive) return {config_.f, config_.cr};
    const std::size_t slot = rng.below(memory_.m_f.size());
    double f = 0.0;
    do {
      f = rng.cauchy(memory_.m_f[slot], 0.1);
    } while (f <= 0.0);
    f = std::min(f, 1.0);
    const double cr = std::clamp(rng.normal(memory_.m_cr[slot], 0.1), 0.0, 1.0);
    return {f, cr};
  }

  void remember_replaced(const std::vector<double>& genome, RngStream& rng) {
    if (memory_.archive_cap == 0) return;
    memory_.archive.push_back(genome);
    if (memory_.archive.size() > memory_.archive_cap) {
      const std::size_t victim = rng.below(memory_.archive.size());
      memory_.archive.erase(memory_.archive.begin() + static_cast<std::ptrdiff_t>(victim));
    }
  }

 private:
  EngineConfig config_;
  AdaptationMemory memory_;
  std::uint64_t mfes_ = 0;
  std::size_t lpsr_np_start_ = 0;
  std::uint64_t lpsr_origin_ = 0;
};

namespace detail {

// Drop members down to target size, worst fitness first; fitness ties drop
// the higher index.
inline void truncate_worst(Population& pop, std::size_t target) {
  if (target >= pop.size()) return;
  std::vector<std::size_t> order(pop.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double fa = *pop.members[a].fitness;
    const double fb = *pop.members[b].fitness;
    return fa != fb ? fa > fb : a > b;
  });
  std::vector<bool> drop(pop.size(), false);
  for (std::size_t k = 0; k < pop.size() - target; ++k) drop[order[k]] = true;
  std::vector<Individual> kept;
  kept.reserve(target);
  for (std::size_t i = 0; i < pop.size(); ++i)
    if (!drop[i]) kept.push_back(std::move(pop.members[i]));
  pop.members = std::move(kept);
}

}  // namespace detail

// One full generation: NP trials via the configured strategy, evaluation,
// per-slot greedy selection, memory/archive update, then LPSR truncation.
inline GenerationReport step_generation(EngineState& engine, Population& pop,
                                        ObjectiveFunction& objective, RngStream& rng) {
  const EngineConfig& cfg = engine.config();
  const std::size_t np = pop.size();
  if (np < 4) throw ConfigurationError("step_generation: population size must be at least 4");
  for (const auto& m : pop.members)
    if (!m.fitness) throw UsageError("step_generation: population must be evaluated");

  std::vector<Individual> trials;
  trials.reserve(np);
  std::vector<std::pair<double, double>> params_used;
  params_used.reserve(np);
  for (std::size_t i = 0; i < np; ++i) {
    const auto [f, cr] = engine.sample_parameters(rng);
    std::vector<double> mutant =
        cfg.strategy == Strategy::Rand1
            ? mutate_rand1(pop, i, f, rng)
            : mutate_current_to_pbest(pop, engine.memory(), i, f, cfg.p, rng);
    std::vector<double> genome =
        cfg.crossover == CrossoverKind::Binomial
            ? crossover_binomial(pop.members[i].genome, mutant, cr, rng)
            : crossover_exponential(pop.members[i].genome, mutant, cr, rng);
    trials.push_back(Individual{std::move(genome), std::nullopt});
    params_used.emplace_back(f, cr);
  }

  GenerationReport report;
  for (Individual& t : trials) {
    t.fitness = objective.evaluate(t.genome);
    ++report.fes_delta;
  }

  for (std::size_t i = 0; i < np; ++i) {
    Individual& target = pop.members[i];
    Individual& trial = trials[i];
    if (*trial.fitness < *target.fitness) {
      report.successes.push_back(
          Success{params_used[i].first, params_used[i].second, *target.fitness - *trial.fitness});
      engine.remember_replaced(target.genome, rng);
    }
    if (*trial.fitness <= *target.fitness) target = std::move(trial);
  }

  if (cfg.adaptive) update_success_memory(engine.memory(), report.successes);
  if (engine.has_lpsr())
    detail::truncate_worst(pop, engine.lpsr_target(objective.evaluations()));

  pop.generation += 1;
  report.best_fitness = best_fitness(pop);
  report.np_after = pop.size();
  return report;
}

}  // namespace rde
