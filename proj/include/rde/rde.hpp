#pragma once

// Umbrella header for the rde library: differential evolution engines with
// an individuals-redistribution controller, restart baselines, a benchmark
// suite, rank-sum comparison utilities, and the experiment harness.

#include "rde/benchmarks.hpp"
#include "rde/config.hpp"
#include "rde/core.hpp"
#include "rde/engine.hpp"
#include "rde/experiment.hpp"
#include "rde/objective.hpp"
#include "rde/redistribution.hpp"
#include "rde/restart.hpp"
#include "rde/rng.hpp"
#include "rde/run_record.hpp"
#include "rde/selftest.hpp"
#include "rde/stats.hpp"
