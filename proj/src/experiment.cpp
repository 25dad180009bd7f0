#include "fifd/experiment.hpp"

#include <fstream>
#include <map>

namespace fifd {

namespace fs = std::filesystem;

const std::vector<Metric>& summary_metrics() {
  static const std::vector<Metric> m = {Metric::cum_regret, Metric::pseudo_regret,
                                        Metric::l2_error, Metric::lambda, Metric::rank};
  return m;
}

std::string file_stem(const AlgorithmSpec& alg) {
  std::string out;
  for (char c : alg.name()) {
    if (c == '(') {
      out += '_';
    } else if (c == '*') {
      out += 'x';
    } else if (c != ')') {
      out += c;
    }
  }
  return out;
}

BoundRow evaluate_bound(const SimConfig& cfg, const AlgorithmSpec& alg, const RunTrace& trace) {
  const BoundConfig bc{cfg.d, cfg.s, noise_sd(cfg.noise, cfg.sigma), cfg.delta, cfg.L};
  BoundRow row;
  row.run_id = trace.run_id;
  row.algorithm = trace.algorithm;
  if (alg.kind == AlgorithmSpec::Kind::fifd_ols) {
    row.report = ols_bound(trace.steps, bc);
    row.eta = row.report.eta_ols;
  } else {
    row.report = ridge_bound(trace.steps, bc, &trace.truth);
    row.eta = row.report.eta_ridge;
  }
  return row;
}

namespace {

std::ofstream open_out(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  return out;
}

}  // namespace

OutputBundle run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir, int threads) {
  const auto cells = expand_grid(cfg);
  for (const auto& c : cells) validate(c.config);

  OutputBundle bundle;
  bundle.out_dir = out_dir;
  bundle.manifest = out_dir / "manifest.txt";
  {
    auto out = open_out(bundle.manifest);
    out << to_config_text(cfg) << "\n[manifest]\n";
    for (const auto& c : cells) {
      out << c.id << ".seeds = " << run_seed(c.config, 0) << ".."
          << run_seed(c.config, c.config.runs - 1) << '\n';
    }
  }

  for (const auto& cell : cells) {
    const SimConfig& sc = cell.config;
    const auto& algs = sc.algorithms;
    std::vector<std::map<Metric, CurveAccumulator>> acc(algs.size());
    std::vector<BoundRow> bounds;
    std::vector<double> vals;

    run_replications(sc, threads, [&](int run, std::vector<RunTrace>& traces) {
      for (std::size_t a = 0; a < algs.size(); ++a) {
        const RunTrace& tr = traces[a];
        const fs::path p = out_dir / "traces" / cell.id / file_stem(algs[a]) /
                           ("run_" + std::to_string(run) + ".csv");
        auto out = open_out(p);
        write_trace_csv(out, tr);
        bundle.trace_files.push_back(p);
        for (Metric m : summary_metrics()) {
          vals.clear();
          for (const auto& r : tr.steps) vals.push_back(metric_value(r, m));
          acc[a][m].add(vals);
        }
        bounds.push_back(evaluate_bound(sc, algs[a], tr));
      }
    });

    for (std::size_t a = 0; a < algs.size(); ++a) {
      for (Metric m : summary_metrics()) {
        const fs::path p = out_dir / "summaries" / cell.id /
                           (file_stem(algs[a]) + "__" + std::string(to_string(m)) + ".csv");
        auto out = open_out(p);
        write_summary_csv(out, acc[a][m].curve(), static_cast<long>(sc.s) + 1);
        bundle.summary_files.push_back(p);
      }
    }
    const fs::path bp = out_dir / "bounds" / (cell.id + ".csv");
    auto out = open_out(bp);
    write_bound_csv(out, bounds);
    bundle.bound_files.push_back(bp);
  }
  return bundle;
}

}  // namespace fifd
