// fifd: run FIFD regression experiments and verification suites.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "fifd/criteria.hpp"
#include "fifd/experiment.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int run_verify(const std::string& suite) {
  bool ok = true;
  for (const auto& r : fifd::checks::run_suite(suite)) {
    std::cout << fifd::checks::format_result(r) << std::endl;
    ok = ok && r.pass;
  }
  return ok ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FIFD sliding-window regression experiments"};
  std::string config_path;
  std::string out_dir;
  std::string suite;
  std::vector<std::string> overrides;
  int runs = 0;
  long long seed = -1;
  int threads = 1;
  app.add_option("--config", config_path, "experiment config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--runs", runs, "replications per grid cell")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "base seed")->check(CLI::NonNegativeNumber);
  app.add_option("--set", overrides, "override, key=value or grid.key=v1,v2 (repeatable)");
  app.add_option("--verify", suite, "verification suite: oracle, identities, bounds, coverage");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    if (app.count("--verify")) {
      if (suite.empty()) {
        std::cerr << "error: --verify needs a suite name (oracle, identities, bounds, coverage)\n";
        return kExitConfig;
      }
      return run_verify(suite);
    }
    if (config_path.empty() || out_dir.empty()) {
      std::cerr << "error: --config and --out are required\n" << app.help();
      return kExitConfig;
    }
    fifd::ExperimentConfig cfg = fifd::load_experiment(config_path);
    for (const auto& o : overrides) fifd::apply_override(cfg, o);
    if (runs > 0) cfg.base.runs = runs;
    if (seed >= 0) cfg.base.base_seed = static_cast<std::uint64_t>(seed);
    const auto bundle = fifd::run_experiment(cfg, out_dir, threads);
    std::cout << "wrote " << bundle.trace_files.size() << " traces, "
              << bundle.summary_files.size() << " summaries, " << bundle.bound_files.size()
              << " bound reports to " << out_dir << "\n";
    return 0;
  } catch (const fifd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fifd::NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
