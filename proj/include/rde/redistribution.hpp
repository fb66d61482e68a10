#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "rde/engine.hpp"
#include "rde/run_record.hpp"

namespace rde {

// Individuals-redistribution control flow.
//
// The run alternates between two modes. In original mode the configured DE
// engine evolves the population one generation at a time while a stagnation
// detector watches the best fitness: a generation counts as stagnant when
// the relative improvement of the epoch-best stays below a threshold. Once
// enough stagnant generations accumulate (twice as many while the epoch is
// at the all-run best), the run switches to redistribution mode. There the
// operators are standardized - rand/1 mutation with F = 1, bare binomial
// crossover with CR = 0.5 - and every trial vector is kept unconditionally,
// so no evaluations are spent and diversity drifts upward. When diversity
// exceeds its threshold (or a generation cap is hit), a random share of the
// final trial set is reflected through the box center, the whole population
// is re-evaluated in one batch, and the run returns to original mode.
//
// Engines with population-size reduction get a recovery pass: while in
// redistribution mode the population is grown back (at most doubling per
// generation) toward the size recorded when diversity first fell below the
// threshold, and the size schedule is rebased afterwards.

struct RedistParams {
  int trigger_generations = 500;         // stagnant generations before redistribution
  double improvement_threshold = 1e-5;   // relative best-fitness improvement that resets the count
  double diversity_threshold = 1e-2;     // diversity level that ends redistribution
  int max_changed_generations = 1000;    // secondary exit for the changed operators
  double replace_fraction = 0.9;         // share of vectors mapped to their opposites
  bool reset_adaptation = false;         // drop engine memory/archive after redistribution

  void validate() const {
    std::vector<std::string> issues;
    if (trigger_generations < 1) issues.push_back("trigger_generations must be at least 1");
    if (!(improvement_threshold > 0.0)) issues.push_back("improvement_threshold must be positive");
    if (!(diversity_threshold > 0.0)) issues.push_back("diversity_threshold must be positive");
    if (max_changed_generations < 1) issues.push_back("max_changed_generations must be at least 1");
    if (!(replace_fraction > 0.0 && replace_fraction <= 1.0))
      issues.push_back("replace_fraction must lie in (0, 1]");
    if (!issues.empty()) {
      std::string msg = "redistribution parameters:";
      for (const auto& s : issues) msg += " " + s + ";";
      throw ConfigurationError(msg);
    }
  }
};

// Controller bookkeeping across one run.
struct RedistState {
  bool redistributing = false;  // mode flag
  int stagnant_generations = 0;
  int changed_generations = 0;
  double epoch_best = std::numeric_limits<double>::infinity();  // best since last redistribution
  double run_best = std::numeric_limits<double>::infinity();    // best of the whole run
  std::optional<std::size_t> recorded_np;  // size snapshot for LPSR recovery
};

// The stagnation window in force: doubled while the current epoch holds the
// all-run best.
inline int applied_trigger_window(const RedistState& state, const RedistParams& params) {
  return state.epoch_best == state.run_best ? 2 * params.trigger_generations
                                            : params.trigger_generations;
}

// One original-mode detector step, fed with the current population best.
// Near-zero and sentinel epoch bests fall back to an absolute-improvement
// comparison so the ratio never divides by ~0. On trigger the mode flips,
// counters clear, and the epoch best becomes an infinity sentinel that the
// first post-redistribution call absorbs.
inline void update_stagnation(RedistState& state, double best, const RedistParams& params) {
  if (state.redistributing)
    throw UsageError("update_stagnation: detector runs in original mode only");
  const bool guard = std::isinf(state.epoch_best) || std::abs(state.epoch_best) < 1e-300;
  const double gain = state.epoch_best - best;
  const bool significant =
      best < state.epoch_best &&
      (guard ? gain >= params.improvement_threshold
             : gain / std::abs(state.epoch_best) >= params.improvement_threshold);
  if (significant)
    state.stagnant_generations = 0;
  else
    state.stagnant_generations += 1;

  if (state.stagnant_generations == applied_trigger_window(state, params)) {
    state.redistributing = true;
    state.stagnant_generations = 0;
    state.changed_generations = 0;
    state.epoch_best = std::numeric_limits<double>::infinity();
    state.run_best = std::min(state.run_best, best);
    return;
  }
  state.epoch_best = std::min(state.epoch_best, best);
  state.run_best = std::min(state.run_best, best);
}

// One generation with the standardized operators: rand/1 mutation with
// F = 1.0 and bare binomial crossover with CR = 0.5 (no forced dimension -
// fitness plays no role here, so an unchanged trial is harmless). The trial
// set is returned unevaluated and verbatim; no evaluations are consumed.
inline Population changed_generation(const Population& pop, RngStream& rng) {
  const std::size_t np = pop.size();
  if (np < 4) throw ConfigurationError("changed_generation: population size must be at least 4");
  Population next = pop;
  for (std::size_t i = 0; i < np; ++i) {
    const std::vector<double> mutant = mutate_rand1(pop, i, 1.0, rng);
    const std::vector<double>& target = pop.members[i].genome;
    std::vector<double> trial(target.size());
    for (std::size_t j = 0; j < trial.size(); ++j)
      trial[j] = rng.uniform01() <= 0.5 ? mutant[j] : target[j];
    next.members[i] = Individual{std::move(trial), std::nullopt};
  }
  return next;
}

// Redistribution ends when diversity crosses its threshold or the changed
// generations exceed their cap. Both comparisons are strict.
inline bool should_exit(double div, int changed_gens, const RedistParams& params) {
  return div > params.diversity_threshold || changed_gens > params.max_changed_generations;
}

// Maps floor(R * NP) distinct members, chosen uniformly without
// replacement, through the opposite vector. All fitness caches are dropped;
// the caller re-evaluates the whole population.
inline Population opposition_replacement(Population pop, double replace_fraction,
                                         RngStream& rng) {
  if (!(replace_fraction > 0.0 && replace_fraction <= 1.0))
    throw UsageError("opposition_replacement: replace fraction must lie in (0, 1]");
  const std::size_t np = pop.size();
  const std::size_t k = static_cast<std::size_t>(
      replace_fraction * static_cast<double>(np) + 1e-9);
  std::vector<std::size_t> idx(np);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t t = 0; t < k; ++t)
    std::swap(idx[t], idx[t + rng.below(np - t)]);
  for (std::size_t t = 0; t < k; ++t) {
    Individual& m = pop.members[idx[t]];
    m.genome = opposite_vector(m.genome, pop.bounds);
  }
  for (Individual& m : pop.members) m.fitness.reset();
  return pop;
}

// Recovery growth for size-reduced engines: keep all trials and append
// targets (in slot order) until min(recorded_np, 2 * |trials|) members.
inline Population lpsr_recovery_step(const Population& targets, Population trials,
                                     std::size_t recorded_np) {
  if (targets.size() != trials.size())
    throw UsageError("lpsr_recovery_step: target and trial sets must match in size");
  const std::size_t np = trials.size();
  const std::size_t want = std::min(recorded_np, 2 * np);
  for (std::size_t i = 0; np + i < want; ++i) trials.members.push_back(targets.members[i]);
  return trials;
}

namespace detail {

inline double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

// Full individuals-redistribution run (IRV).
inline RunRecord run_irv(EngineState engine, ObjectiveFunction objective,
                         const RedistParams& params, std::uint64_t mfes, RngStream rng) {
  params.validate();
  RunRecord rec;
  rec.seed = rng.seed();
  const auto started = std::chrono::steady_clock::now();
  try {
    objective.reset_evaluations();
    engine.start_run(mfes);
    Population pop = random_population(engine.initial_np(), objective.bounds(), rng);
    evaluate_missing(pop, objective);
    Tracer tracer(mfes, objective.f_star());
    tracer.observe(objective.evaluations(), best_fitness(pop));
    RedistState state;

    while (objective.evaluations() <= mfes) {
      if (!state.redistributing) {
        update_stagnation(state, best_fitness(pop), params);
        if (state.redistributing)
          rec.events.push_back(RunEvent{objective.evaluations(), EventKind::Trigger,
                                        diversity(pop), pop.size()});
      }
      if (!state.redistributing) {
        if (engine.has_lpsr() && !state.recorded_np &&
            diversity(pop) < params.diversity_threshold)
          state.recorded_np = pop.size();
        step_generation(engine, pop, objective, rng);
        tracer.observe(objective.evaluations(), best_fitness(pop));
      } else {
        const double div = diversity(pop);
        state.changed_generations += 1;
        Population trials = changed_generation(pop, rng);
        const bool leaving = should_exit(div, state.changed_generations, params);
        if (leaving) {
          rec.events.push_back(RunEvent{objective.evaluations(),
                                        div > params.diversity_threshold ? EventKind::ExitDiv
                                                                         : EventKind::ExitGen,
                                        div, pop.size()});
          trials = opposition_replacement(std::move(trials), params.replace_fraction, rng);
        }
        Population next = engine.has_lpsr() && state.recorded_np
                              ? lpsr_recovery_step(pop, std::move(trials), *state.recorded_np)
                              : std::move(trials);
        if (leaving) {
          for (Individual& m : next.members) m.fitness.reset();  // full re-evaluation
          evaluate_missing(next, objective);
          next.generation += 1;
          state.redistributing = false;
          state.changed_generations = 0;
          if (params.reset_adaptation) engine.reset_adaptation();
          if (engine.has_lpsr()) engine.rebase_lpsr(objective.evaluations(), next.size());
          rec.events.push_back(RunEvent{objective.evaluations(), EventKind::Replace,
                                        diversity(next), next.size()});
          tracer.observe(objective.evaluations(), best_fitness(next));
        }
        pop = std::move(next);
      }
    }
    rec.samples = tracer.finalize(objective.evaluations());
    rec.final_error = tracer.run_best_error();
    rec.evaluations = objective.evaluations();
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.wall_seconds = detail::elapsed_seconds(started);
  return rec;
}

}  // namespace rde
