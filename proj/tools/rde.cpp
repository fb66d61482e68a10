#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rde/rde.hpp"

namespace {

// exit codes: 0 ok, 2 config error, 3 runtime failure, 4 failed checks
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;
constexpr int kCheckFailure = 4;

std::string default_out_dir() {
  const char* env = std::getenv("RDE_OUT_DIR");
  return env ? env : "";
}

int cmd_run(const std::string& config_path, bool force, unsigned jobs) {
  rde::ExperimentConfig cfg = rde::load_config(config_path);
  if (cfg.out_dir.empty()) cfg.out_dir = default_out_dir();
  if (cfg.out_dir.empty()) cfg.out_dir = "rde_out";
  const rde::ExperimentStats stats = rde::run_experiment(cfg, force, jobs, &std::cout);
  std::cout << "executed " << stats.executed << ", skipped " << stats.skipped << ", failed "
            << stats.failed << " (results in " << cfg.out_dir << ")\n";
  return stats.failed == 0 ? kOk : kRuntimeError;
}

int cmd_report(const std::string& dir) {
  rde::write_report(dir, &std::cout);
  return kOk;
}

int cmd_list_functions(std::size_t dim, std::uint64_t seed) {
  std::cout << "name,base,dim,bounds,f_star\n";
  for (const std::string& name : rde::bench::suite_function_names()) {
    const rde::ObjectiveFunction fn = rde::bench::make_function(name, dim, seed);
    std::cout << name << ',' << rde::bench::manifest_for(name, dim, seed).base << ',' << dim
              << ",[" << rde::format_double(fn.bounds().low[0]) << ","
              << rde::format_double(fn.bounds().up[0]) << "],"
              << rde::format_double(fn.f_star()) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rde - differential evolution with individuals redistribution"};
  app.require_subcommand(1);

  std::string config_path;
  bool force = false;
  unsigned jobs = 0;
  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_flag("--force", force, "recompute cells even when already completed");
  run->add_option("--jobs", jobs, "worker threads (default: hardware concurrency)");

  std::string report_dir = default_out_dir();
  CLI::App* report = app.add_subcommand("report", "summarize a completed experiment directory");
  CLI::Option* dir_opt =
      report->add_option("--dir", report_dir, "experiment output directory ($RDE_OUT_DIR)");
  if (report_dir.empty()) dir_opt->required();

  std::size_t dim = 10;
  std::uint64_t suite_seed = 1;
  CLI::App* list = app.add_subcommand("list-functions", "print the benchmark registry");
  list->add_option("--dim", dim, "dimensionality");
  list->add_option("--suite-seed", suite_seed, "landscape seed");

  CLI::App* selftest = app.add_subcommand("selftest", "run the built-in oracle checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, force, jobs);
    if (report->parsed()) return cmd_report(report_dir);
    if (list->parsed()) return cmd_list_functions(dim, suite_seed);
    if (selftest->parsed()) return rde::run_selftest(std::cout) ? kOk : kCheckFailure;
  } catch (const rde::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const rde::ConfigurationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
