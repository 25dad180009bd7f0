#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "fifd/config.hpp"
#include "fifd/csv.hpp"
#include "fifd/experiment.hpp"

using namespace fifd;
namespace fs = std::filesystem;

namespace {

const char* cli() {
  const char* p = std::getenv("FIFD_CLI");
  REQUIRE_MESSAGE(p != nullptr, "FIFD_CLI must point at the fifd binary");
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(cli()) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "fifd_test_cli" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

const char* kMinimal = "d = 5\ns = 20\nt_horizon = 60\nalgorithms = fifd_adaptive_ridge\nruns = 1\n";

}  // namespace

TEST_CASE("minimal config writes one trace of T - s rows") {
  const fs::path dir = scratch("minimal");
  const fs::path cfg = write_file(dir / "min.cfg", kMinimal);
  REQUIRE(run_cli("--config " + cfg.string() + " --out " + (dir / "out").string()) == 0);
  const fs::path trace = dir / "out/traces/base/fifd_adaptive_ridge/run_0.csv";
  REQUIRE(fs::exists(trace));
  CHECK(count_lines(trace) == 41);
  std::ifstream in(trace);
  std::string header;
  std::getline(in, header);
  CHECK(header == kTraceHeader);
  CHECK(fs::exists(dir / "out/manifest.txt"));
  CHECK(fs::exists(dir / "out/bounds/base.csv"));
  CHECK(fs::exists(dir / "out/summaries/base/fifd_adaptive_ridge__cum_regret.csv"));
}

TEST_CASE("grid config writes one summary per cell, algorithm and metric") {
  const fs::path dir = scratch("grid");
  const fs::path cfg = write_file(dir / "grid.cfg",
                                  "d = 5\nt_horizon = 100\nruns = 2\n"
                                  "algorithms = fifd_adaptive_ridge, fixed_ridge(1*sigma), "
                                  "fixed_ridge(10*sigma), fixed_ridge(100*sigma), fifd_ols\n"
                                  "[grid]\ns = 20, 40, 60, 80\nsigma = 1, 2, 3\n");
  REQUIRE(run_cli("--config " + cfg.string() + " --out " + (dir / "out").string() + " --threads 2") == 0);
  for (Metric m : summary_metrics()) {
    std::size_t n = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir / "out/summaries")) {
      const std::string name = e.path().filename().string();
      if (e.is_regular_file() && name.ends_with("__" + std::string(to_string(m)) + ".csv")) ++n;
    }
    CHECK(n == 4 * 3 * 5);
  }
  CHECK(fs::exists(dir / "out/summaries/s80_sigma3/fixed_ridge_100xsigma__lambda.csv"));
  CHECK(count_lines(dir / "out/traces/s40_sigma2/fifd_ols/run_1.csv") == 61);
}

TEST_CASE("rerunning from the manifest reproduces every file") {
  const fs::path dir = scratch("manifest");
  const fs::path cfg = write_file(dir / "exp.cfg",
                                  "d = 6\nt_horizon = 90\nruns = 3\nbase_seed = 11\n"
                                  "algorithms = fifd_ols, fifd_adaptive_ridge, switching_ridge\n"
                                  "[grid]\ns = 10, 20\n");
  REQUIRE(run_cli("--config " + cfg.string() + " --out " + (dir / "a").string() +
                  " --set sigma=2 --threads 3") == 0);
  REQUIRE(run_cli("--config " + (dir / "a/manifest.txt").string() + " --out " + (dir / "b").string()) == 0);
  const auto a = tree(dir / "a");
  const auto b = tree(dir / "b");
  CHECK(a.size() == b.size());
  CHECK(a == b);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("exit");
  CHECK(run_cli("--config " + (dir / "missing.cfg").string() + " --out " + dir.string()) == 2);
  const fs::path bad = write_file(dir / "bad.cfg", "d = 5\ns = 1\nt_horizon = 60\n");
  CHECK(run_cli("--config " + bad.string() + " --out " + (dir / "o1").string()) == 2);
  const fs::path unknown = write_file(dir / "unknown.cfg", "d = 5\nwindow = 3\n");
  CHECK(run_cli("--config " + unknown.string() + " --out " + (dir / "o2").string()) == 2);
  const fs::path huge = write_file(dir / "huge.cfg", "d = 5\ns = 20\nt_horizon = 60\nsigma = 1e300\n"
                                                     "algorithms = fifd_ols\n");
  CHECK(run_cli("--config " + huge.string() + " --out " + (dir / "o3").string()) == 3);
  CHECK(run_cli("--verify \"\"") == 2);
  CHECK(run_cli("--verify nonsense") == 2);
  CHECK(run_cli("--out " + dir.string()) == 2);
  CHECK(run_cli("--verify identities") == 0);
}

TEST_CASE("trace csv round-trips") {
  SimConfig c;
  c.d = 6;
  c.s = 12;
  c.t_horizon = 80;
  const RunTrace tr = run_schedule(c, AlgorithmSpec::parse("fixed_ridge(10*sigma)"), 2);
  std::stringstream ss;
  write_trace_csv(ss, tr);
  const TraceFile back = read_trace_csv(ss);
  CHECK(back.run_id == tr.run_id);
  CHECK(back.algorithm == tr.algorithm);
  REQUIRE(back.steps.size() == tr.steps.size());
  for (std::size_t i = 0; i < tr.steps.size(); ++i) {
    const auto& x = tr.steps[i];
    const auto& y = back.steps[i];
    CHECK(x.t == y.t);
    CHECK(x.y_hat == y.y_hat);
    CHECK(x.pseudo_regret == y.pseudo_regret);
    CHECK(x.abs_loss == y.abs_loss);
    CHECK(x.cum_regret == y.cum_regret);
    CHECK(x.l2_error == y.l2_error);
    CHECK(x.lambda == y.lambda);
    CHECK(x.lambda_delta == y.lambda_delta);
    CHECK(x.rank == y.rank);
    CHECK(x.min_eig == y.min_eig);
    CHECK(x.frt == y.frt);
    CHECK(x.beta == y.beta);
    CHECK(x.ellipsoid_valid == y.ellipsoid_valid);
    CHECK(x.window_size == y.window_size);
  }

  std::stringstream wrong("run_id,t\n0,1\n");
  CHECK_THROWS_AS(read_trace_csv(wrong), StructuralError);
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("config text") {
  ExperimentConfig cfg = parse_experiment(
      "# comment\nd = 7\ns=9\nt_horizon = 50\nnoise = student_t\ndf = 8\n"
      "algorithms = fifd_ols, fixed_ridge(10*sigma)\ntheta_inf_norm = 0.5\n"
      "[grid]\nsigma = 1, 3\n[manifest]\nanything = goes\n");
  CHECK(cfg.base.d == 7);
  CHECK(cfg.base.s == 9);
  CHECK(cfg.base.noise.kind == NoiseKind::student_t);
  CHECK(cfg.base.noise.df == 8.0);
  CHECK(cfg.base.algorithms.size() == 2);
  CHECK(cfg.base.theta_inf_norm == 0.5);
  const auto cells = expand_grid(cfg);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].id == "sigma1");
  CHECK(cells[1].config.sigma == 3.0);

  const ExperimentConfig again = parse_experiment(to_config_text(cfg));
  CHECK(to_config_text(again) == to_config_text(cfg));
  CHECK(to_key_values(again.base) == to_key_values(cfg.base));

  apply_override(cfg, "runs=4");
  CHECK(cfg.base.runs == 4);
  apply_override(cfg, "grid.s=10,20,30");
  CHECK(expand_grid(cfg).size() == 6);
  CHECK(expand_grid(cfg)[5].id == "sigma3_s30");
  CHECK_THROWS_AS(apply_override(cfg, "runs"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "grid.algorithms=fifd_ols"), ConfigError);
  CHECK_THROWS_AS(parse_experiment("d = five\n"), ConfigError);
  CHECK(expand_grid(parse_experiment(kMinimal))[0].id == "base");
}

TEST_CASE("bound csv header") {
  std::stringstream ss;
  write_bound_csv(ss, {});
  std::string header;
  std::getline(ss, header);
  CHECK(header == kBoundHeader);
}
