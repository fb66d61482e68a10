#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rde/benchmarks.hpp"
#include "rde/engine.hpp"
#include "rde/redistribution.hpp"
#include "rde/run_record.hpp"

namespace rde {

// Config rejected; every problem found is listed, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues)
      : std::runtime_error(join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string msg = "invalid config:";
    for (const auto& s : issues) msg += "\n  - " + s;
    return msg;
  }
  std::vector<std::string> issues_;
};

inline const std::vector<double>& default_tdiv_sweep() {
  static const std::vector<double> sweep = {1e-1, 5e-2, 1e-2, 5e-3, 1e-3, 5e-4, 1e-4};
  return sweep;
}

struct ExperimentConfig {
  std::vector<std::string> functions;
  std::size_t dim = 10;
  std::uint64_t suite_seed = 1;
  EngineConfig engine = EngineConfig::classic_de();
  std::vector<RunMode> modes;
  RedistParams redist;               // diversity_threshold is taken from the sweep per cell
  std::vector<double> tdiv_sweep = default_tdiv_sweep();
  std::uint64_t mfes = 0;
  std::vector<std::uint64_t> seeds;  // default 0..24
  std::uint64_t master_seed = 12345;
  std::string out_dir;
  double alpha = 0.05;

  bool has_mode(RunMode m) const {
    for (RunMode mode : modes)
      if (mode == m) return true;
    return false;
  }

  nlohmann::json to_json() const;
  std::string fingerprint() const;
};

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(std::vector<std::string>& issues) : issues_(issues) {}

  void unknown_keys(const nlohmann::json& obj, std::string_view where,
                    std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : obj.items()) {
      bool known = false;
      for (std::string_view k : allowed)
        if (key == k) known = true;
      if (!known) issues_.push_back(std::string(where) + ": unknown key '" + key + "'");
    }
  }

  template <typename T>
  void read(const nlohmann::json& obj, const std::string& key, T& target,
            std::string_view where) {
    if (!obj.contains(key)) return;
    try {
      target = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      issues_.push_back(std::string(where) + "." + key + ": wrong type");
    }
  }

  void fail(std::string message) { issues_.push_back(std::move(message)); }

 private:
  std::vector<std::string>& issues_;
};

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  std::vector<std::string> issues;
  detail::ConfigReader reader(issues);
  ExperimentConfig cfg;

  if (!j.is_object()) {
    issues.push_back("top level must be an object");
    throw ConfigError(std::move(issues));
  }
  reader.unknown_keys(j, "config",
                      {"functions", "dim", "suite_seed", "engine", "modes", "redist", "mfes",
                       "seeds", "master_seed", "out_dir", "alpha"});
  for (const char* key : {"functions", "modes", "mfes"})
    if (!j.contains(key)) issues.push_back(std::string("missing required key '") + key + "'");

  reader.read(j, "functions", cfg.functions, "config");
  reader.read(j, "dim", cfg.dim, "config");
  reader.read(j, "suite_seed", cfg.suite_seed, "config");
  reader.read(j, "mfes", cfg.mfes, "config");
  reader.read(j, "master_seed", cfg.master_seed, "config");
  reader.read(j, "out_dir", cfg.out_dir, "config");
  reader.read(j, "alpha", cfg.alpha, "config");

  if (j.contains("modes")) {
    std::vector<std::string> names;
    reader.read(j, "modes", names, "config");
    for (const std::string& name : names) {
      try {
        cfg.modes.push_back(parse_mode(name));
      } catch (const ConfigurationError& e) {
        issues.push_back(e.what());
      }
    }
  }

  if (j.contains("engine")) {
    const auto& e = j.at("engine");
    if (!e.is_object()) {
      issues.push_back("engine: must be an object");
    } else {
      reader.unknown_keys(e, "engine",
                          {"strategy", "crossover", "np", "f", "cr", "adaptive", "p",
                           "archive_cap", "lpsr", "preserve_lpsr_on_restart"});
      std::string strategy = "rand1", crossover = "binomial";
      reader.read(e, "strategy", strategy, "engine");
      reader.read(e, "crossover", crossover, "engine");
      if (strategy == "rand1")
        cfg.engine.strategy = Strategy::Rand1;
      else if (strategy == "current_to_pbest")
        cfg.engine.strategy = Strategy::CurrentToPBest;
      else
        issues.push_back("engine.strategy: expected 'rand1' or 'current_to_pbest'");
      if (crossover == "binomial")
        cfg.engine.crossover = CrossoverKind::Binomial;
      else if (crossover == "exponential")
        cfg.engine.crossover = CrossoverKind::Exponential;
      else
        issues.push_back("engine.crossover: expected 'binomial' or 'exponential'");
      reader.read(e, "np", cfg.engine.np, "engine");
      reader.read(e, "f", cfg.engine.f, "engine");
      reader.read(e, "cr", cfg.engine.cr, "engine");
      reader.read(e, "adaptive", cfg.engine.adaptive, "engine");
      reader.read(e, "p", cfg.engine.p, "engine");
      bool cap_given = e.contains("archive_cap");
      reader.read(e, "archive_cap", cfg.engine.archive_cap, "engine");
      if (e.contains("lpsr")) {
        const auto& l = e.at("lpsr");
        if (!l.is_object()) {
          issues.push_back("engine.lpsr: must be an object");
        } else {
          reader.unknown_keys(l, "engine.lpsr", {"np_min"});
          LpsrSettings settings;
          settings.np_init = cfg.engine.np;
          reader.read(l, "np_min", settings.np_min, "engine.lpsr");
          cfg.engine.lpsr = settings;
        }
      }
      reader.read(e, "preserve_lpsr_on_restart", cfg.engine.preserve_lpsr_on_restart, "engine");
      if (cfg.engine.adaptive && !cap_given)
        cfg.engine.archive_cap = static_cast<std::size_t>(
            std::lround(2.6 * static_cast<double>(cfg.engine.np)));
    }
  }

  if (j.contains("redist")) {
    const auto& r = j.at("redist");
    if (!r.is_object()) {
      issues.push_back("redist: must be an object");
    } else {
      reader.unknown_keys(r, "redist",
                          {"trigger_generations", "improvement_threshold",
                           "max_changed_generations", "replace_fraction",
                           "diversity_thresholds", "reset_adaptation"});
      reader.read(r, "trigger_generations", cfg.redist.trigger_generations, "redist");
      reader.read(r, "improvement_threshold", cfg.redist.improvement_threshold, "redist");
      reader.read(r, "max_changed_generations", cfg.redist.max_changed_generations, "redist");
      reader.read(r, "replace_fraction", cfg.redist.replace_fraction, "redist");
      reader.read(r, "reset_adaptation", cfg.redist.reset_adaptation, "redist");
      if (r.contains("diversity_thresholds"))
        reader.read(r, "diversity_thresholds", cfg.tdiv_sweep, "redist");
    }
  }

  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    if (s.is_number_unsigned() || s.is_number_integer()) {
      const std::int64_t count = s.get<std::int64_t>();
      if (count < 1) {
        issues.push_back("seeds: count must be at least 1");
      } else {
        cfg.seeds.resize(static_cast<std::size_t>(count));
        std::iota(cfg.seeds.begin(), cfg.seeds.end(), std::uint64_t{0});
      }
    } else if (s.is_array()) {
      reader.read(j, "seeds", cfg.seeds, "config");
    } else {
      issues.push_back("seeds: expected a count or an array of seeds");
    }
  }
  if (cfg.seeds.empty()) {
    cfg.seeds.resize(25);
    std::iota(cfg.seeds.begin(), cfg.seeds.end(), std::uint64_t{0});
  }

  // semantic checks, only when shape-level parsing got that far
  if (j.contains("functions")) {
    if (cfg.functions.empty()) issues.push_back("functions: list must be non-empty");
    for (const std::string& name : cfg.functions) {
      const auto& known = bench::suite_function_names();
      if (std::find(known.begin(), known.end(), name) == known.end())
        issues.push_back("functions: unknown function '" + name + "'");
    }
  }
  if (j.contains("modes") && cfg.modes.empty() && issues.empty())
    issues.push_back("modes: list must be non-empty");
  if (j.contains("mfes") && cfg.mfes == 0) issues.push_back("mfes: must be positive");
  if (cfg.dim == 0) issues.push_back("dim: must be positive");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) issues.push_back("alpha: must lie in (0, 1)");
  if (cfg.has_mode(RunMode::IRV) && cfg.tdiv_sweep.empty())
    cfg.tdiv_sweep = default_tdiv_sweep();
  for (double t : cfg.tdiv_sweep)
    if (!(t > 0.0)) issues.push_back("redist.diversity_thresholds: entries must be positive");
  try {
    cfg.engine.validate();
  } catch (const ConfigurationError& e) {
    issues.push_back(e.what());
  }
  try {
    cfg.redist.validate();
  } catch (const ConfigurationError& e) {
    issues.push_back(e.what());
  }

  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file '" + path.string() + "'"});
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
  }
  return parse_config(j);
}

inline nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json e{{"strategy", engine.strategy == Strategy::Rand1 ? "rand1" : "current_to_pbest"},
                   {"crossover", engine.crossover == CrossoverKind::Binomial ? "binomial"
                                                                             : "exponential"},
                   {"np", engine.np},
                   {"f", engine.f},
                   {"cr", engine.cr},
                   {"adaptive", engine.adaptive},
                   {"p", engine.p},
                   {"archive_cap", engine.archive_cap},
                   {"preserve_lpsr_on_restart", engine.preserve_lpsr_on_restart}};
  if (engine.lpsr) e["lpsr"] = {{"np_min", engine.lpsr->np_min}};
  std::vector<std::string> mode_names;
  for (RunMode m : modes) mode_names.emplace_back(mode_name(m));
  return nlohmann::json{
      {"functions", functions},
      {"dim", dim},
      {"suite_seed", suite_seed},
      {"engine", e},
      {"modes", mode_names},
      {"redist",
       {{"trigger_generations", redist.trigger_generations},
        {"improvement_threshold", redist.improvement_threshold},
        {"max_changed_generations", redist.max_changed_generations},
        {"replace_fraction", redist.replace_fraction},
        {"diversity_thresholds", tdiv_sweep},
        {"reset_adaptation", redist.reset_adaptation}}},
      {"mfes", mfes},
      {"seeds", seeds},
      {"master_seed", master_seed},
      {"alpha", alpha}};
}

inline std::string ExperimentConfig::fingerprint() const {
  // out_dir intentionally excluded: moving results must not invalidate them
  const std::string canon = to_json().dump();
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canon)));
  return std::string(buf);
}

}  // namespace rde
