#pragma once

#include <cstddef>
#include <span>

#include "fifd/step.hpp"

namespace fifd {

struct OlsState {
  Vector theta_hat;
  double q_adaptive = 0.0;
  double beta_radius = 0.0;
  bool ellipsoid_valid = false;
};

struct EllipsoidRadius {
  double radius = 0.0;
  bool valid = false;
  double q = 0.0;
};

// Minimum-norm least squares: inv * xy_sum (zero for an empty window).
Vector ols_estimate(const GramState& gram);

double ols_predict(const Vector& theta_hat, const Vector& x);

// sigma * q * sqrt((2d/s) log(2d/delta)), q = x_inf / (smallest positive eigenvalue / s).
EllipsoidRadius ols_ellipsoid_radius(const GramState& gram, double sigma, double delta,
                                     std::size_t s, Index d);

// Predicts arrivals[0].x with the current window, records losses, then
// ingests every arrival and evicts the oldest per schedule.
StepRecord fifd_ols_step(WindowBuffer& buf, GramState& gram, OlsState& ols,
                         std::span<const Observation> arrivals, std::size_t evictions,
                         const Vector& theta_star, const StepParams& params);

StepRecord fifd_ols_step(WindowBuffer& buf, GramState& gram, OlsState& ols,
                         const Observation& incoming, const Vector& theta_star,
                         const StepParams& params);

}  // namespace fifd
