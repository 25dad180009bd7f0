#pragma once

#include <cstddef>
#include <span>

#include "fifd/ols.hpp"
#include "fifd/truth.hpp"

namespace fifd {

struct RidgeState {
  Vector theta_hat;
  double lambda_t = 0.0;
  double sigma_hat = 0.0;
  double kappa = 1.0;
  double nu = 1.0;
  double q_lambda = 0.0;
  double beta_radius = 0.0;
  double lambda_delta = 0.0;
  bool started = false;
};

// Sample standard deviation (divisor n - 1). Needs at least two values.
double estimate_sigma(std::span<const double> responses);

// sigma_hat * x_inf * sqrt(2 s log(2d/delta)) / theta_inf_norm.
// theta_inf_norm is an oracle input; 1 matches unit-norm truths.
double adaptive_lambda(double sigma_hat, double x_inf_norm, std::size_t s, Index d,
                       double delta, double theta_inf_norm = 1.0);

struct WpssrCheck {
  double ratio = 0.0;  // p_min / inf_norm
  double bound = 0.0;
  bool holds = false;
  bool applicable = false;  // false when theta* has no positive coordinate
};

double wpssr_bound(std::size_t s, Index d, double delta, int p_count);
WpssrCheck wpssr_check(const TruthProfile& truth, std::size_t s, Index d, double delta);

// log(6|P|/delta) / sqrt(log(2d/delta))
double ridge_kappa(int p_count, Index d, double delta);

Vector ridge_estimate(const GramState& gram);

// sigma * kappa * nu * q_lambda * sqrt(d / (2s)), q_lambda = x_inf / (min_eig / s).
// Without a truth profile kappa = nu = 1 and the radius is flagged invalid.
EllipsoidRadius ridge_ellipsoid_radius(const GramState& gram, double sigma,
                                       const TruthProfile* truth, double delta,
                                       std::size_t s, Index d);

struct RidgeParams {
  double sigma = 1.0;
  double delta = 0.05;
  double theta_inf_norm = 1.0;
  bool truth_constants = true;  // use kappa, nu from the truth profile
};

// Re-estimates sigma_hat and lambda from the current window, predicts
// arrivals[0].x, records losses, then ingests per schedule.
StepRecord fifd_ridge_step(WindowBuffer& buf, GramState& gram, RidgeState& state,
                           std::span<const Observation> arrivals, std::size_t evictions,
                           const TruthProfile& truth, const RidgeParams& params);

StepRecord fixed_ridge_step(WindowBuffer& buf, GramState& gram, RidgeState& state,
                            std::span<const Observation> arrivals, std::size_t evictions,
                            const TruthProfile& truth, const RidgeParams& params,
                            double lambda_fixed);

enum class SwitchMode { ridge, ols };

// Switches to OLS for good once more than 2d samples are retained.
SwitchMode switching_step(SwitchMode mode, std::size_t n_accumulated, Index d);

}  // namespace fifd
