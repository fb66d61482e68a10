// Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
// Criterion 5 executes the desk-scale comparison protocol end to end and is
// the slow one (a few minutes); everything else finishes in seconds.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "rde/rde.hpp"

namespace rde {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void criterion_line(int number, const char* name) {
  std::printf("[ACCEPTANCE] criterion %d (%s): %s\n", number, name,
              ::testing::Test::HasFailure() ? "FAIL" : "PASS");
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("rde_acceptance_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// --- criterion 1: formula oracles --------------------------------------

namespace oracle {

std::vector<double> sorted_median(const Population& pop) {
  std::vector<double> center(pop.bounds.dim());
  for (std::size_t j = 0; j < center.size(); ++j) {
    std::vector<double> column;
    for (const auto& m : pop.members) column.push_back(m.genome[j]);
    std::sort(column.begin(), column.end());
    const std::size_t np = column.size();
    center[j] = np % 2 == 1 ? column[np / 2] : 0.5 * (column[np / 2 - 1] + column[np / 2]);
  }
  return center;
}

double diversity_direct(const Population& pop) {
  const std::vector<double> m = sorted_median(pop);
  double total = 0.0;
  for (const auto& member : pop.members)
    for (std::size_t j = 0; j < pop.bounds.dim(); ++j)
      total += std::abs(member.genome[j] - m[j]) / (pop.bounds.up[j] - pop.bounds.low[j]);
  return total / static_cast<double>(pop.size());
}

std::vector<double> ranks_of(std::vector<double> pooled) {
  std::vector<std::size_t> order(pooled.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(pooled.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && pooled[order[j]] == pooled[order[i]]) ++j;
    double sum = 0.0;
    for (std::size_t k = i; k < j; ++k) sum += static_cast<double>(k + 1);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = sum / static_cast<double>(j - i);
    i = j;
  }
  return ranks;
}

void subsets(const std::vector<double>& ranks, std::size_t next, std::size_t remaining,
             double sum, double observed, std::uint64_t& total, std::uint64_t& le,
             std::uint64_t& ge) {
  if (remaining == 0) {
    ++total;
    if (sum <= observed) ++le;
    if (sum >= observed) ++ge;
    return;
  }
  if (ranks.size() - next < remaining) return;
  subsets(ranks, next + 1, remaining - 1, sum + ranks[next], observed, total, le, ge);
  subsets(ranks, next + 1, remaining, sum, observed, total, le, ge);
}

double exact_rank_sum_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::vector<double> ranks = ranks_of(pooled);
  double observed = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) observed += ranks[i];
  std::uint64_t total = 0, le = 0, ge = 0;
  subsets(ranks, 0, a.size(), 0.0, observed, total, le, ge);
  return std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total));
}

}  // namespace oracle

TEST(Acceptance, C1_FormulaOracles) {
  RngStream rng(10001);

  for (int rep = 0; rep < 200; ++rep) {  // center + diversity on the same draws
    Population pop =
        random_population(1 + rng.below(12), Bounds::cube(1 + rng.below(6), -80.0, 80.0), rng);
    const auto center = population_center(pop);
    const auto expected = oracle::sorted_median(pop);
    for (std::size_t j = 0; j < center.size(); ++j)
      ASSERT_NEAR(center[j], expected[j], 1e-9 * (1.0 + std::abs(expected[j])));
    const double div = diversity(pop);
    ASSERT_NEAR(div, oracle::diversity_direct(pop), 1e-9 * (1.0 + div));
  }

  for (int rep = 0; rep < 200; ++rep) {  // opposite vector against the direct arithmetic
    const std::size_t dim = 1 + rng.below(8);
    std::vector<double> low(dim), up(dim), x(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      low[j] = rng.uniform(-100.0, 50.0);
      up[j] = low[j] + rng.uniform(0.5, 150.0);
      x[j] = rng.uniform(low[j], up[j]);
    }
    const Bounds bounds(low, up);
    const auto o = opposite_vector(x, bounds);
    for (std::size_t j = 0; j < dim; ++j)
      ASSERT_NEAR(o[j], up[j] + low[j] - x[j], 1e-9 * (1.0 + std::abs(o[j])));
  }

  for (int rep = 0; rep < 200; ++rep) {  // rand/1 mutants come from a valid index pair
    const std::size_t np = 4 + rng.below(8);
    const std::size_t dim = 1 + rng.below(5);
    Population pop{{}, Bounds::cube(dim, -1e6, 1e6), 0};
    for (std::size_t i = 0; i < np; ++i) {
      std::vector<double> g(dim);
      for (double& v : g) v = rng.uniform(-100.0, 100.0);
      pop.members.push_back(Individual{std::move(g), std::nullopt});
    }
    const std::size_t i = rng.below(np);
    const double f = rng.uniform(0.05, 1.2);
    const auto v = mutate_rand1(pop, i, f, rng);
    bool matched = false;
    for (std::size_t r1 = 0; r1 < np && !matched; ++r1) {
      if (r1 == i) continue;
      for (std::size_t r2 = 0; r2 < np && !matched; ++r2) {
        if (r2 == i || r2 == r1) continue;
        bool all = true;
        for (std::size_t j = 0; j < dim; ++j) {
          const double expected = pop.members[i].genome[j] +
                                  f * (pop.members[r1].genome[j] - pop.members[r2].genome[j]);
          if (std::abs(v[j] - expected) > 1e-9 * (1.0 + std::abs(expected))) all = false;
        }
        matched = all;
      }
    }
    ASSERT_TRUE(matched);
  }

  for (int rep = 0; rep < 200; ++rep) {  // size schedule against long-double interpolation
    const std::size_t np_min = 4 + rng.below(10);
    const std::size_t np_init = np_min + rng.below(400);
    const std::uint64_t mfes = 1 + rng.below(3000000);
    const std::uint64_t fes = rng.below(mfes + 1);
    const long double exact =
        static_cast<long double>(np_init) +
        (static_cast<long double>(np_min) - static_cast<long double>(np_init)) *
            static_cast<long double>(fes) / static_cast<long double>(mfes);
    ASSERT_EQ(lpsr_target_size(fes, mfes, np_init, np_min),
              static_cast<std::size_t>(llroundl(exact)));
  }

  for (int rep = 0; rep < 200; ++rep) {  // exact rank-sum p against full enumeration
    const std::size_t n1 = 3 + rng.below(4);
    const std::size_t n2 = 3 + rng.below(std::min<std::size_t>(12 - n1, 6) - 2);
    std::vector<double> a(n1), b(n2);
    for (double& v : a) v = static_cast<double>(rng.below(9));
    for (double& v : b) v = static_cast<double>(rng.below(9));
    const RankSumResult r = wilcoxon_rank_sum(a, b);
    ASSERT_TRUE(r.exact);
    ASSERT_EQ(r.p_value, oracle::exact_rank_sum_p(a, b));
  }

  criterion_line(1, "formula oracles");
}

// --- criterion 2: evaluation accounting ---------------------------------

TEST(Acceptance, C2_EvaluationAccounting) {
  {  // every redistribution process costs exactly NP evaluations
    RedistParams params;
    params.trigger_generations = 5;
    params.diversity_threshold = 0.05;
    params.max_changed_generations = 50;
    const RunRecord rec = run_irv(EngineState(EngineConfig::classic_de(40)),
                                  bench::make_base("rastrigin", 5), params, 40000,
                                  RngStream(20001));
    ASSERT_TRUE(rec.ok()) << rec.error;
    std::size_t processes = 0;
    for (std::size_t k = 0; k < rec.events.size(); ++k) {
      if (rec.events[k].kind != EventKind::Trigger) continue;
      ASSERT_LT(k + 2, rec.events.size());
      ASSERT_EQ(rec.events[k + 2].kind, EventKind::Replace);
      ASSERT_EQ(rec.events[k + 1].fes, rec.events[k].fes);  // changed generations: zero cost
      ASSERT_EQ(rec.events[k + 2].fes - rec.events[k].fes, 40u);
      ASSERT_EQ(rec.events[k + 2].np, 40u);
      ++processes;
    }
    ASSERT_GE(processes, 3u);
  }
  {  // every complete restart costs exactly NP_init evaluations
    RedistParams params;
    params.trigger_generations = 5;
    const RunRecord rec = run_crv(EngineState(EngineConfig::adaptive_lshade(50, 4)),
                                  bench::make_base("rastrigin", 5), params, 40000,
                                  RngStream(20002));
    ASSERT_TRUE(rec.ok()) << rec.error;
    std::size_t restarts = 0;
    for (std::size_t k = 0; k < rec.events.size(); ++k) {
      if (rec.events[k].kind != EventKind::Trigger) continue;
      ASSERT_LT(k + 1, rec.events.size());
      ASSERT_EQ(rec.events[k + 1].kind, EventKind::Restart);
      ASSERT_EQ(rec.events[k + 1].fes - rec.events[k].fes, 50u);
      ASSERT_EQ(rec.events[k + 1].np, 50u);
      ++restarts;
    }
    ASSERT_GE(restarts, 1u);
  }
  criterion_line(2, "evaluation accounting");
}

// --- criterion 3: trigger semantics --------------------------------------

TEST(Acceptance, C3_TriggerStateMachine) {
  RedistParams params;
  params.trigger_generations = 3;
  params.improvement_threshold = 0.1;

  struct Row {
    double best;
    int gn;
    bool mode;
    double epoch;
    double run;
    int window_before;  // applied window in force when the row is processed
  };
  // hand-traced table: sentinel absorption, reset on significant gain,
  // stagnation increments, doubling at the run best, trigger, and the
  // single window once the epoch trails the run best
  const Row table[] = {
      {100.0, 0, false, 100.0, 100.0, 6}, {99.0, 1, false, 99.0, 99.0, 6},
      {50.0, 0, false, 50.0, 50.0, 6},    {50.0, 1, false, 50.0, 50.0, 6},
      {50.0, 2, false, 50.0, 50.0, 6},    {50.0, 3, false, 50.0, 50.0, 6},
      {50.0, 4, false, 50.0, 50.0, 6},    {50.0, 5, false, 50.0, 50.0, 6},
  };
  RedistState st;
  for (const Row& row : table) {
    ASSERT_EQ(applied_trigger_window(st, params), row.window_before);
    update_stagnation(st, row.best, params);
    ASSERT_EQ(st.stagnant_generations, row.gn);
    ASSERT_EQ(st.redistributing, row.mode);
    ASSERT_DOUBLE_EQ(st.epoch_best, row.epoch);
    ASSERT_DOUBLE_EQ(st.run_best, row.run);
  }
  update_stagnation(st, 50.0, params);  // hits 6 == 2 * 3 exactly
  ASSERT_TRUE(st.redistributing);
  ASSERT_EQ(st.stagnant_generations, 0);
  ASSERT_EQ(st.changed_generations, 0);
  ASSERT_TRUE(std::isinf(st.epoch_best));  // sentinel reset
  ASSERT_DOUBLE_EQ(st.run_best, 50.0);

  st.redistributing = false;  // process finished; epoch now trails the run best
  const Row after[] = {
      {60.0, 0, false, 60.0, 50.0, 3},  // sentinel inf != run best 50: single window
      {60.0, 1, false, 60.0, 50.0, 3},
      {60.0, 2, false, 60.0, 50.0, 3},
  };
  for (const Row& row : after) {
    ASSERT_EQ(applied_trigger_window(st, params), row.window_before);
    update_stagnation(st, row.best, params);
    ASSERT_EQ(st.stagnant_generations, row.gn);
    ASSERT_DOUBLE_EQ(st.epoch_best, row.epoch);
    ASSERT_DOUBLE_EQ(st.run_best, row.run);
  }
  update_stagnation(st, 60.0, params);
  ASSERT_TRUE(st.redistributing);  // fires at the single window of 3

  // the window is doubled or single, never accumulated
  RedistState fresh;
  ASSERT_EQ(applied_trigger_window(fresh, params), 6);
  fresh.epoch_best = 1.0;
  fresh.run_best = 1.0;
  ASSERT_EQ(applied_trigger_window(fresh, params), 6);
  fresh.epoch_best = 2.0;
  ASSERT_EQ(applied_trigger_window(fresh, params), 3);

  criterion_line(3, "trigger state machine");
}

// --- criterion 4: diversification ----------------------------------------

TEST(Acceptance, C4_DiversificationFromAConvergedCluster) {
  const Bounds bounds = Bounds::cube(10, -100.0, 100.0);
  double mean_before = 0.0, mean_after = 0.0;
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    RngStream rng(40000 + trial);
    std::vector<double> anchor(10);
    for (double& v : anchor) v = rng.uniform(-60.0, 60.0);
    Population pop{{}, bounds, 0};
    for (int i = 0; i < 50; ++i) {
      std::vector<double> g = anchor;
      for (double& v : g) v += rng.uniform(-5e-7, 5e-7);  // spread at most 1e-6
      pop.members.push_back(Individual{std::move(g), std::nullopt});
    }
    mean_before += diversity(pop);
    for (int g = 0; g < 100; ++g) pop = changed_generation(pop, rng);
    mean_after += diversity(pop);
  }
  mean_before /= 50.0;
  mean_after /= 50.0;
  std::printf("[ACCEPTANCE]   diversification: mean before %.3e, after %.3e (factor %.1f)\n",
              mean_before, mean_after, mean_after / mean_before);
  ASSERT_GE(mean_after, 10.0 * mean_before);
  criterion_line(4, "diversification from a converged cluster");
}

// --- criterion 5: desk-scale directional comparison ----------------------

TEST(Acceptance, C5_DeskScaleComparisonProtocol) {
  const fs::path dir = fresh_dir("protocol");
  // entry criterion at its published defaults; at this budget smaller
  // trigger windows fire while the baseline still grinds and turn the
  // comparison into a significant loss for the restarting versions
  json j{{"functions", {"sr_rastrigin", "composition2"}},
         {"dim", 10},
         {"suite_seed", 1},
         {"engine", {{"np", 100}, {"f", 0.5}, {"cr", 0.9}}},
         {"modes", {"OV", "CRV", "IRV"}},
         {"mfes", 200000},
         {"seeds", 25},
         {"master_seed", 424242},
         {"out_dir", dir.string()}};
  const ExperimentConfig cfg = parse_config(j);
  const ExperimentStats stats = run_experiment(cfg, false, 0, nullptr);
  ASSERT_EQ(stats.failed, 0u);
  ASSERT_EQ(stats.executed + stats.skipped, enumerate_cells(cfg).size());

  // budget discipline, verified from the persisted artifacts
  std::vector<RunSummaryRow> rows;
  for (const Cell& cell : enumerate_cells(cfg)) {
    json meta;
    std::ifstream(dir / cell_dir_name(cell) / "meta.json") >> meta;
    ASSERT_EQ(meta.at("status"), "done");
    ASSERT_LE(meta.at("evaluations").get<std::uint64_t>(), cfg.mfes + cfg.engine.np);
    rows.push_back(RunSummaryRow{cell.function, cell.mode, cell.tdiv_index, cell.seed,
                                 meta.at("final_error").get<double>()});
  }

  const SummaryReport report = summarize(rows, cfg.tdiv_sweep.size(), cfg.alpha);
  ASSERT_TRUE(report.gaps.empty());
  for (const PairCell& cell : report.cells)
    std::printf("[ACCEPTANCE]   %s  %-12s p=%.4g (%s) -> %s\n", cell.function.c_str(),
                cell.pair.c_str(), cell.p_value, cell.exact ? "exact" : "approx",
                std::string(decision_name(cell.decision)).c_str());

  for (const std::string& function : {std::string("sr_rastrigin"), std::string("composition2")}) {
    for (const std::string& pair : {std::string("CRV vs OV"), std::string("IRV vs CRV")}) {
      bool found = false;
      for (const PairCell& cell : report.cells) {
        if (cell.function != function || cell.pair != pair) continue;
        found = true;
        EXPECT_NE(cell.decision, Decision::Loss) << function << " " << pair;
      }
      EXPECT_TRUE(found) << function << " " << pair;
    }
  }
  write_report(dir, nullptr);
  criterion_line(5, "desk-scale comparison protocol");
}

// --- criterion 6: determinism ---------------------------------------------

TEST(Acceptance, C6_ByteIdenticalArtifacts) {
  auto make_cfg = [](const fs::path& dir) {
    json j{{"functions", {"sr_rastrigin"}},
           {"dim", 6},
           {"engine", {{"np", 24}}},
           {"modes", {"OV", "CRV", "IRV"}},
           {"redist",
            {{"trigger_generations", 8}, {"diversity_thresholds", {0.05, 0.005}}}},
           {"mfes", 20000},
           {"seeds", 3},
           {"master_seed", 777},
           {"out_dir", dir.string()}};
    return parse_config(j);
  };
  const fs::path dir_a = fresh_dir("det_a");
  const fs::path dir_b = fresh_dir("det_b");
  const ExperimentConfig cfg_a = make_cfg(dir_a);
  const ExperimentConfig cfg_b = make_cfg(dir_b);
  ASSERT_EQ(run_experiment(cfg_a, false, 2, nullptr).failed, 0u);
  ASSERT_EQ(run_experiment(cfg_b, false, 1, nullptr).failed, 0u);
  write_report(dir_a, nullptr);
  write_report(dir_b, nullptr);

  for (const Cell& cell : enumerate_cells(cfg_a)) {
    const std::string name = cell_dir_name(cell);
    ASSERT_EQ(slurp(dir_a / name / "trace.csv"), slurp(dir_b / name / "trace.csv")) << name;
    ASSERT_EQ(slurp(dir_a / name / "events.csv"), slurp(dir_b / name / "events.csv")) << name;
  }
  for (const char* file : {"summary.txt", "pairwise.csv", "tdiv_ratio.csv", "mean_traces.csv"})
    ASSERT_EQ(slurp(dir_a / "report" / file), slurp(dir_b / "report" / file)) << file;
  criterion_line(6, "byte-identical artifacts under one master seed");
}

// --- criterion 7: population-size recovery --------------------------------

TEST(Acceptance, C7_LpsrRecovery) {
  {  // hand-computed doubling-capped growth sequences
    RngStream rng(70001);
    const Bounds bounds = Bounds::cube(4, -10.0, 10.0);

    auto grow_sizes = [&](std::size_t start, std::size_t recorded) {
      Population pop = random_population(start, bounds, rng);
      std::vector<std::size_t> sizes;
      for (int step = 0; step < 5; ++step) {
        Population trials = changed_generation(pop, rng);
        pop = lpsr_recovery_step(pop, std::move(trials), recorded);
        sizes.push_back(pop.size());
      }
      return sizes;
    };
    EXPECT_EQ(grow_sizes(10, 15), (std::vector<std::size_t>{15, 15, 15, 15, 15}));
    EXPECT_EQ(grow_sizes(10, 30), (std::vector<std::size_t>{20, 30, 30, 30, 30}));
    EXPECT_EQ(grow_sizes(6, 40), (std::vector<std::size_t>{12, 24, 40, 40, 40}));
    EXPECT_EQ(grow_sizes(12, 8), (std::vector<std::size_t>{12, 12, 12, 12, 12}));
  }
  {  // forced redistribution after shrinkage recovers the recorded size
    RedistParams params;
    params.trigger_generations = 60;
    params.improvement_threshold = std::numeric_limits<double>::infinity();  // pure clock
    params.diversity_threshold = 4.0;  // recorded at the very first generation
    params.max_changed_generations = 8;
    const RunRecord rec = run_irv(EngineState(EngineConfig::adaptive_lshade(50, 4)),
                                  bench::make_base("sphere", 10), params, 60000,
                                  RngStream(70002));
    ASSERT_TRUE(rec.ok()) << rec.error;
    std::size_t processes = 0;
    for (std::size_t k = 0; k < rec.events.size(); ++k) {
      if (rec.events[k].kind != EventKind::Trigger) continue;
      ASSERT_LT(k + 2, rec.events.size());
      const RunEvent& trigger = rec.events[k];
      const RunEvent& replace = rec.events[k + 2];
      ASSERT_EQ(replace.kind, EventKind::Replace);
      EXPECT_LT(trigger.np, 50u) << "population must have shrunk before the trigger";
      EXPECT_EQ(replace.np, 50u) << "recovery must reach the recorded size";
      EXPECT_EQ(replace.fes - trigger.fes, replace.np);
      ++processes;
    }
    ASSERT_GE(processes, 2u);
    std::printf("[ACCEPTANCE]   lpsr recovery processes observed: %zu\n", processes);
  }
  criterion_line(7, "population-size recovery");
}

}  // namespace
}  // namespace rde
