#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fifd/ridge.hpp"

namespace fifd {

enum class NoiseKind { gaussian, student_t };
struct NoiseModel {
  NoiseKind kind = NoiseKind::gaussian;
  double df = 5.0;
  bool scale_by_sigma = false;  // student_t only
};

enum class Design { gaussian_normalized, basis_uniform };

struct Schedule {
  enum class Kind { fifd, add_k_delete_1 };
  Kind kind = Kind::fifd;
  int k = 1;
};

struct AlgorithmSpec {
  enum class Kind { fifd_ols, fifd_adaptive_ridge, fixed_ridge, switching_ridge };
  Kind kind = Kind::fifd_adaptive_ridge;
  double lambda = 0.0;           // fixed_ridge only
  bool lambda_per_sigma = false; // lambda is a multiple of sigma

  double resolved_lambda(double sigma) const;
  std::string name() const;  // round-trips through parse()
  static AlgorithmSpec parse(std::string_view text);
};

struct SimConfig {
  Index d = 100;
  std::size_t s = 40;
  long t_horizon = 3000;
  double delta = 0.05;
  double sigma = 1.0;
  double L = 1.0;
  NoiseModel noise;
  Design design = Design::gaussian_normalized;
  Schedule schedule;
  std::vector<AlgorithmSpec> algorithms{AlgorithmSpec{}};
  int runs = 1;
  std::uint64_t base_seed = 1;
  bool redraw_truth = true;
  std::optional<double> theta_inf_norm;  // unset: use the true |theta*|_inf
  GramSettings gram;
};

// Throws ConfigError.
void validate(const SimConfig& cfg);

using Rng = std::mt19937_64;

struct RunStreams {
  Rng design;
  Rng truth;
  Rng noise;
  static RunStreams for_seed(std::uint64_t seed_run, std::uint64_t truth_seed);
};

Vector gen_context(Design design, Index d, Rng& rng);
TruthProfile gen_truth(Index d, Rng& rng);
double gen_noise(const NoiseModel& noise, double sigma, Rng& rng);

// Standard deviation of one noise draw.
double noise_sd(const NoiseModel& noise, double sigma);

// Warm-start block of s observations followed by k arrivals per step.
struct Stream {
  TruthProfile truth;
  std::vector<Observation> obs;
};

std::uint64_t run_seed(const SimConfig& cfg, int run_index);
std::size_t stream_length(const SimConfig& cfg);
Stream make_stream(const SimConfig& cfg, int run_index);

struct RunTrace {
  int run_id = 0;
  std::string algorithm;
  std::uint64_t seed = 0;
  TruthProfile truth;
  std::vector<StepRecord> steps;
  long switch_t = -1;  // first OLS step of switching_ridge
};

RunTrace run_on_stream(const SimConfig& cfg, const AlgorithmSpec& alg, const Stream& stream,
                       int run_id);
RunTrace run_schedule(const SimConfig& cfg, const AlgorithmSpec& alg, int run_index);

// Runs every algorithm on every replication, sharing the stream of a run
// across algorithms. `consume` sees runs in index order, one at a time.
void run_replications(const SimConfig& cfg, int threads,
                      const std::function<void(int run_index, std::vector<RunTrace>&)>& consume);

enum class Metric { pseudo_regret, cum_regret, abs_loss, l2_error, lambda, rank, min_eig, frt, beta };
std::string_view to_string(Metric m);
Metric parse_metric(std::string_view name);
double metric_value(const StepRecord& r, Metric m);

struct AggregateCurve {
  std::vector<double> mean;
  std::vector<double> std_error;  // sample SD / sqrt(runs)
  std::size_t runs = 0;
  bool stderr_defined = false;  // runs >= 2
};

// Streaming pointwise mean and standard error.
class CurveAccumulator {
 public:
  void add(std::span<const double> values);
  AggregateCurve curve() const;

 private:
  std::size_t runs_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

AggregateCurve aggregate(std::span<const RunTrace> traces, Metric metric);

struct SlopeDiagnostics {
  double linear_r2 = 0.0;
  double late_early_ratio = 0.0;
};

// The curve holds cumulative regret; instantaneous values are its increments.
SlopeDiagnostics slope_diagnostics(const AggregateCurve& cumulative, std::size_t burn_in = 0);

}  // namespace fifd
