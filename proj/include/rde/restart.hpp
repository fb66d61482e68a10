#pragma once

#include <chrono>
#include <cstdint>

#include "rde/redistribution.hpp"

namespace rde {

// Baseline drivers sharing the record layout (and, for CRV, the entry
// criterion) with run_irv.

// Original version: plain generation loop until the budget is spent.
inline RunRecord run_ov(EngineState engine, ObjectiveFunction objective, std::uint64_t mfes,
                        RngStream rng) {
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
    while (objective.evaluations() <= mfes) {
      step_generation(engine, pop, objective, rng);
      tracer.observe(objective.evaluations(), best_fitness(pop));
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

// Complete-restart version: same stagnation detector as run_irv, but a
// trigger re-initializes the whole population at its initial size and
// resets the engine's adaptive state. The run best survives restarts.
inline RunRecord run_crv(EngineState engine, ObjectiveFunction objective,
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
      update_stagnation(state, best_fitness(pop), params);
      if (state.redistributing) {
        rec.events.push_back(RunEvent{objective.evaluations(), EventKind::Trigger,
                                      diversity(pop), pop.size()});
        state.redistributing = false;
        state.changed_generations = 0;
        engine.on_restart(objective.evaluations());
        const std::uint64_t gen = pop.generation;
        pop = random_population(engine.initial_np(), objective.bounds(), rng);
        pop.generation = gen + 1;
        evaluate_missing(pop, objective);
        rec.events.push_back(RunEvent{objective.evaluations(), EventKind::Restart,
                                      diversity(pop), pop.size()});
        tracer.observe(objective.evaluations(), best_fitness(pop));
        continue;
      }
      step_generation(engine, pop, objective, rng);
      tracer.observe(objective.evaluations(), best_fitness(pop));
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
