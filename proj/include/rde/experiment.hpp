#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rde/benchmarks.hpp"
#include "rde/config.hpp"
#include "rde/restart.hpp"
#include "rde/stats.hpp"

namespace rde {

// One run to execute: function x mode x sweep position (IRV only) x seed.
struct Cell {
  std::string function;
  RunMode mode = RunMode::OV;
  int tdiv_index = -1;
  std::uint64_t seed = 0;
};

inline std::string cell_key(const Cell& c) {
  std::string key = c.function;
  key += '|';
  key += mode_name(c.mode);
  if (c.tdiv_index >= 0) key += "|t" + std::to_string(c.tdiv_index);
  key += "|s" + std::to_string(c.seed);
  return key;
}

inline std::string cell_dir_name(const Cell& c) {
  std::string name = c.function;
  name += "__";
  name += mode_name(c.mode);
  if (c.tdiv_index >= 0) name += "__t" + std::to_string(c.tdiv_index);
  name += "__s" + std::to_string(c.seed);
  return name;
}

inline std::uint64_t cell_seed(std::uint64_t master, const Cell& c) {
  return derive_seed(master, cell_key(c));
}

inline std::vector<Cell> enumerate_cells(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  for (const std::string& function : cfg.functions) {
    for (RunMode mode : cfg.modes) {
      if (mode == RunMode::IRV) {
        for (std::size_t t = 0; t < cfg.tdiv_sweep.size(); ++t)
          for (std::uint64_t seed : cfg.seeds)
            cells.push_back(Cell{function, mode, static_cast<int>(t), seed});
      } else {
        for (std::uint64_t seed : cfg.seeds)
          cells.push_back(Cell{function, mode, -1, seed});
      }
    }
  }
  return cells;
}

// Dispatch of a single cell; the objective is built fresh so the counter
// belongs to this run alone.
inline RunRecord run_cell(const ExperimentConfig& cfg, const Cell& cell) {
  ObjectiveFunction objective = bench::make_function(cell.function, cfg.dim, cfg.suite_seed);
  EngineState engine(cfg.engine);
  RngStream rng(cell_seed(cfg.master_seed, cell));
  RunRecord rec;
  switch (cell.mode) {
    case RunMode::OV:
      rec = run_ov(std::move(engine), std::move(objective), cfg.mfes, rng);
      break;
    case RunMode::CRV:
      rec = run_crv(std::move(engine), std::move(objective), cfg.redist, cfg.mfes, rng);
      break;
    case RunMode::IRV: {
      RedistParams params = cfg.redist;
      params.diversity_threshold = cfg.tdiv_sweep.at(static_cast<std::size_t>(cell.tdiv_index));
      rec = run_irv(std::move(engine), std::move(objective), params, cfg.mfes, rng);
      break;
    }
  }
  rec.fingerprint = cfg.fingerprint();
  return rec;
}

struct ExperimentStats {
  std::size_t executed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
};

namespace detail {

inline nlohmann::json cell_meta(const ExperimentConfig& cfg, const Cell& cell,
                                const RunRecord& rec) {
  nlohmann::json meta{
      {"cell", cell_dir_name(cell)},
      {"function", cell.function},
      {"mode", std::string(mode_name(cell.mode))},
      {"seed", cell.seed},
      {"rng_seed", cell_seed(cfg.master_seed, cell)},
      {"fingerprint", rec.fingerprint},
      {"status", rec.ok() ? "done" : "error"},
      {"final_error", rec.final_error},
      {"evaluations", rec.evaluations},
      {"wall_seconds", rec.wall_seconds},
  };
  if (cell.tdiv_index >= 0) {
    meta["tdiv_index"] = cell.tdiv_index;
    meta["t_div"] = cfg.tdiv_sweep.at(static_cast<std::size_t>(cell.tdiv_index));
  }
  if (!rec.ok()) meta["error"] = rec.error;
  return meta;
}

inline bool cell_completed(const std::filesystem::path& dir, const std::string& fingerprint) {
  std::ifstream in(dir / "meta.json");
  if (!in) return false;
  try {
    nlohmann::json meta;
    in >> meta;
    return meta.value("status", "") == "done" && meta.value("fingerprint", "") == fingerprint;
  } catch (const nlohmann::json::exception&) {
    return false;
  }
}

inline void persist_cell(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                         const Cell& cell, const RunRecord& rec) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "trace.csv");
    write_trace_csv(out, rec.samples);
  }
  {
    std::ofstream out(dir / "events.csv");
    write_events_csv(out, rec.events);
  }
  {
    std::ofstream out(dir / "meta.json");
    out << cell_meta(cfg, cell, rec).dump(2) << '\n';
  }
}

}  // namespace detail

// Executes every cell, skipping ones already completed under the same
// fingerprint unless forced. Cells are independent; they run on a small
// thread pool and the journal is the only serialized artifact.
inline ExperimentStats run_experiment(const ExperimentConfig& cfg, bool force = false,
                                      unsigned jobs = 0, std::ostream* log = nullptr) {
  namespace fs = std::filesystem;
  if (cfg.out_dir.empty()) throw ConfigError({"out_dir is not set (config key or RDE_OUT_DIR)"});
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);

  {
    std::ofstream config_out(out / "config.json");
    nlohmann::json j = cfg.to_json();
    j["out_dir"] = cfg.out_dir;
    config_out << j.dump(2) << '\n';
  }
  {
    std::vector<bench::ManifestRow> rows;
    for (const std::string& name : cfg.functions)
      rows.push_back(bench::manifest_for(name, cfg.dim, cfg.suite_seed));
    std::ofstream manifest_out(out / "suite_manifest.csv");
    bench::write_suite_manifest(manifest_out, rows);
  }

  const std::vector<Cell> cells = enumerate_cells(cfg);
  const std::string fingerprint = cfg.fingerprint();

  std::mutex journal_mutex;
  std::ofstream journal(out / "journal.csv", std::ios::app);
  ExperimentStats stats;
  std::atomic<std::size_t> next{0};
  std::mutex stats_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      const fs::path dir = out / cell_dir_name(cell);
      if (!force && detail::cell_completed(dir, fingerprint)) {
        std::lock_guard lock(stats_mutex);
        ++stats.skipped;
        continue;
      }
      const RunRecord rec = run_cell(cfg, cell);
      detail::persist_cell(dir, cfg, cell, rec);
      {
        std::lock_guard lock(journal_mutex);
        journal << cell_dir_name(cell) << ',' << (rec.ok() ? "done" : "error") << ','
                << format_double(rec.wall_seconds) << ',' << rec.evaluations << '\n';
        journal.flush();
        if (log) {
          *log << "[" << (rec.ok() ? "done" : "FAILED") << "] " << cell_dir_name(cell);
          if (rec.ok())
            *log << "  error=" << format_double(rec.final_error);
          else
            *log << "  " << rec.error;
          *log << "\n";
        }
      }
      std::lock_guard lock(stats_mutex);
      if (rec.ok())
        ++stats.executed;
      else
        ++stats.failed;
    }
  };

  unsigned n_jobs = jobs ? jobs : std::max(1u, std::thread::hardware_concurrency());
  n_jobs = std::min<unsigned>(n_jobs, static_cast<unsigned>(cells.size()) + 1);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_jobs; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  return stats;
}

// ---------------------------------------------------------------------------
// Reporting over persisted artifacts.
// ---------------------------------------------------------------------------

namespace detail {

struct LoadedCell {
  Cell cell;
  double final_error = 0.0;
  bool ok = false;
};

}  // namespace detail

// Rebuilds the summary tables and mean traces from a completed (or partial)
// experiment directory. Missing and failed cells are flagged, never
// silently skipped. Output is deterministic for unchanged inputs.
inline void write_report(const std::filesystem::path& out_dir, std::ostream* log = nullptr) {
  namespace fs = std::filesystem;
  std::ifstream config_in(out_dir / "config.json");
  if (!config_in)
    throw ConfigError({"no config.json under '" + out_dir.string() + "' (not an experiment dir?)"});
  nlohmann::json j;
  config_in >> j;
  const ExperimentConfig cfg = parse_config(j);

  const std::vector<Cell> cells = enumerate_cells(cfg);
  std::vector<RunSummaryRow> rows;
  std::vector<std::string> missing;
  for (const Cell& cell : cells) {
    const fs::path dir = out_dir / cell_dir_name(cell);
    std::ifstream meta_in(dir / "meta.json");
    if (!meta_in) {
      missing.push_back(cell_dir_name(cell) + ": not run");
      continue;
    }
    nlohmann::json meta;
    try {
      meta_in >> meta;
    } catch (const nlohmann::json::exception&) {
      missing.push_back(cell_dir_name(cell) + ": unreadable meta.json");
      continue;
    }
    if (meta.value("status", "") != "done") {
      missing.push_back(cell_dir_name(cell) + ": " + meta.value("error", "failed"));
      continue;
    }
    rows.push_back(RunSummaryRow{cell.function, cell.mode, cell.tdiv_index, cell.seed,
                                 meta.at("final_error").get<double>()});
  }

  SummaryReport report = summarize(rows, cfg.tdiv_sweep.size(), cfg.alpha);
  for (const std::string& gap : missing) report.gaps.push_back(gap);

  const fs::path report_dir = out_dir / "report";
  fs::create_directories(report_dir);

  {
    std::ofstream out(report_dir / "pairwise.csv");
    out << "function,pair,p_value,branch,decision\n";
    for (const PairCell& c : report.cells)
      out << c.function << ',' << c.pair << ',' << format_double(c.p_value) << ','
          << (c.exact ? "exact" : "approx") << ',' << decision_name(c.decision) << '\n';
  }
  {
    std::ofstream out(report_dir / "tdiv_ratio.csv");
    out << "position,t_div,best_count\n";
    for (std::size_t t = 0; t < cfg.tdiv_sweep.size(); ++t)
      out << t << ',' << format_double(cfg.tdiv_sweep[t]) << ',' << report.tdiv_best_counts[t]
          << '\n';
  }
  {
    std::ofstream out(report_dir / "mean_traces.csv");
    out << "function,mode,t_div,fes,mean_best_error\n";
    for (const std::string& function : report.functions) {
      auto emit_group = [&](RunMode mode, int tdiv_index) {
        std::vector<std::vector<TracePoint>> traces;
        for (const Cell& cell : cells) {
          if (cell.function != function || cell.mode != mode || cell.tdiv_index != tdiv_index)
            continue;
          std::ifstream trace_in(out_dir / cell_dir_name(cell) / "trace.csv");
          if (!trace_in) continue;
          auto trace = read_trace_csv(trace_in);
          if (!trace.empty()) traces.push_back(std::move(trace));
        }
        if (traces.empty()) return;
        const MeanTrace mean = mean_best_error_trace(traces, cfg.mfes);
        const std::string tdiv_field =
            tdiv_index >= 0 ? format_double(cfg.tdiv_sweep[static_cast<std::size_t>(tdiv_index)])
                            : std::string();
        for (std::size_t i = 0; i < mean.fes.size(); ++i)
          out << function << ',' << mode_name(mode) << ',' << tdiv_field << ',' << mean.fes[i]
              << ',' << format_double(mean.mean_error[i]) << '\n';
      };
      for (RunMode mode : cfg.modes) {
        if (mode == RunMode::IRV)
          for (std::size_t t = 0; t < cfg.tdiv_sweep.size(); ++t)
            emit_group(mode, static_cast<int>(t));
        else
          emit_group(mode, -1);
      }
    }
  }
  {
    std::ofstream out(report_dir / "summary.txt");
    out << "experiment summary\n";
    out << "==================\n";
    out << "functions:";
    for (const std::string& f : cfg.functions) out << ' ' << f;
    out << "\nmodes:";
    for (RunMode m : cfg.modes) out << ' ' << mode_name(m);
    out << "\nseeds: " << cfg.seeds.size() << "   dim: " << cfg.dim << "   mfes: " << cfg.mfes
        << "   alpha: " << format_double(cfg.alpha) << "\n\n";

    out << "win:loss by rank-sum test (first side wins when significantly smaller)\n";
    for (const char* pair : {"CRV vs OV", "IRV vs OV", "IRV vs CRV"}) {
      auto it = report.totals.find(pair);
      if (it == report.totals.end()) continue;
      out << "  " << pair << "   " << ratio_string(it->second.first, it->second.second) << '\n';
    }

    out << "\nper-function decisions\n";
    for (const PairCell& c : report.cells)
      out << "  " << c.function << "  " << c.pair << "  p=" << format_double(c.p_value) << " ("
          << (c.exact ? "exact" : "approx") << ")  " << decision_name(c.decision) << '\n';

    if (!report.best_tdiv.empty()) {
      out << "\nbest diversity threshold per function\n";
      for (const auto& [function, index] : report.best_tdiv)
        out << "  " << function << "  " << format_double(cfg.tdiv_sweep[static_cast<std::size_t>(index)])
            << '\n';
      out << "\nbest-result counts over the sweep (";
      for (std::size_t t = 0; t < cfg.tdiv_sweep.size(); ++t)
        out << (t ? ":" : "") << format_double(cfg.tdiv_sweep[t]);
      out << ")\n  " << tdiv_ratio_string(report.tdiv_best_counts) << '\n';
    }

    out << "\ngaps\n";
    if (report.gaps.empty()) {
      out << "  none\n";
    } else {
      for (const std::string& gap : report.gaps) out << "  " << gap << '\n';
    }
  }

  if (log) {
    *log << "report written to " << (report_dir).string() << " (" << report.cells.size()
         << " comparisons, " << report.gaps.size() << " gaps)\n";
  }
}

}  // namespace rde
