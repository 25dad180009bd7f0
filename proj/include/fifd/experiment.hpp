#pragma once

#include <filesystem>
#include <vector>

#include "fifd/config.hpp"
#include "fifd/csv.hpp"

namespace fifd {

struct OutputBundle {
  std::filesystem::path out_dir;
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> trace_files;
  std::vector<std::filesystem::path> summary_files;
  std::vector<std::filesystem::path> bound_files;
};

// Metrics written as summary curves for every (cell, algorithm).
const std::vector<Metric>& summary_metrics();

// Directory-safe algorithm name: fixed_ridge(10*sigma) -> fixed_ridge_10xsigma.
std::string file_stem(const AlgorithmSpec& alg);

// Bound report for one trace, picking the evaluator by algorithm.
BoundRow evaluate_bound(const SimConfig& cfg, const AlgorithmSpec& alg, const RunTrace& trace);

// Layout under out_dir:
//   manifest.txt
//   traces/<cell>/<algorithm>/run_<i>.csv
//   summaries/<cell>/<algorithm>__<metric>.csv
//   bounds/<cell>.csv
OutputBundle run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                            int threads);

}  // namespace fifd
