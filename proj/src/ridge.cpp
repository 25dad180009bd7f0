#include "fifd/ridge.hpp"

#include <cmath>
#include <limits>

namespace fifd {

TruthProfile TruthProfile::from(const Vector& theta_star) {
  TruthProfile t;
  t.theta_star = theta_star;
  t.p_min = std::numeric_limits<double>::infinity();
  t.n_max = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < theta_star.size(); ++i) {
    const double v = theta_star(i);
    if (v > 0.0) {
      ++t.p_count;
      t.p_min = std::min(t.p_min, v);
    } else if (v < 0.0) {
      ++t.n_count;
      t.n_max = std::max(t.n_max, v);
    }
  }
  if (t.p_count == 0) t.p_min = 0.0;
  if (t.n_count == 0) t.n_max = 0.0;
  t.inf_norm = theta_star.size() ? theta_star.cwiseAbs().maxCoeff() : 0.0;
  return t;
}

double estimate_sigma(std::span<const double> responses) {
  if (responses.size() < 2) throw ConfigError("sigma estimate needs at least two responses");
  double mean = 0.0;
  for (double y : responses) mean += y;
  mean /= static_cast<double>(responses.size());
  double ss = 0.0;
  for (double y : responses) ss += (y - mean) * (y - mean);
  return std::sqrt(ss / static_cast<double>(responses.size() - 1));
}

double adaptive_lambda(double sigma_hat, double x_inf_norm, std::size_t s, Index d,
                       double delta, double theta_inf_norm) {
  if (!(theta_inf_norm > 0.0)) throw ConfigError("theta_inf_norm must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (sigma_hat < 0.0 || x_inf_norm < 0.0 || s == 0 || d <= 0) {
    throw ConfigError("adaptive_lambda: invalid argument");
  }
  const double l2 = std::log(2.0 * static_cast<double>(d) / delta);
  return sigma_hat * x_inf_norm * std::sqrt(2.0 * static_cast<double>(s) * l2) / theta_inf_norm;
}

double wpssr_bound(std::size_t s, Index d, double delta, int p_count) {
  const double sd = static_cast<double>(s);
  const double l2 = std::log(2.0 * static_cast<double>(d) / delta);
  const double c3 = std::log(6.0 * static_cast<double>(d) / delta) * l2;
  const double lp = std::log(12.0 * p_count / delta);
  return (-std::sqrt(c3) + std::sqrt(c3 + sd * sd * l2 * lp)) / (sd * l2);
}

WpssrCheck wpssr_check(const TruthProfile& truth, std::size_t s, Index d, double delta) {
  WpssrCheck c;
  if (truth.p_count == 0 || !(truth.inf_norm > 0.0)) return c;
  c.applicable = true;
  c.ratio = truth.p_min / truth.inf_norm;
  c.bound = wpssr_bound(s, d, delta, truth.p_count);
  c.holds = c.ratio <= c.bound;
  return c;
}

double ridge_kappa(int p_count, Index d, double delta) {
  return std::log(6.0 * p_count / delta) / std::sqrt(std::log(2.0 * static_cast<double>(d) / delta));
}

Vector ridge_estimate(const GramState& gram) { return gram.inv * gram.xy_sum; }

EllipsoidRadius ridge_ellipsoid_radius(const GramState& gram, double sigma,
                                       const TruthProfile* truth, double delta,
                                       std::size_t s, Index d) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (s == 0) throw ConfigError("window size must be positive");
  EllipsoidRadius out;
  const double sd = static_cast<double>(s);
  const double phi2 = gram.min_eig / sd;
  out.q = phi2 > 0.0 ? gram.x_inf_norm / phi2 : 0.0;
  double kappa = 1.0;
  double nu = 1.0;
  bool assumption = false;
  if (truth != nullptr && truth->p_count > 0) {
    kappa = ridge_kappa(truth->p_count, d, delta);
    nu = truth->inf_norm / truth->p_min;
    assumption = wpssr_check(*truth, s, d, delta).holds;
  }
  out.radius = sigma * kappa * nu * out.q * std::sqrt(static_cast<double>(d) / (2.0 * sd));
  out.valid = assumption && phi2 > 0.0;
  return out;
}

namespace {

StepRecord ridge_predict_and_ingest(WindowBuffer& buf, GramState& gram, RidgeState& state,
                                    std::span<const Observation> arrivals,
                                    std::size_t evictions, const TruthProfile& truth,
                                    const RidgeParams& params) {
  state.theta_hat = ridge_estimate(gram);
  const TruthProfile* t = params.truth_constants ? &truth : nullptr;
  const auto e = ridge_ellipsoid_radius(gram, params.sigma, t, params.delta, buf.size(), gram.dim());
  state.q_lambda = e.q;
  state.beta_radius = e.radius;
  if (t != nullptr && t->p_count > 0) {
    state.kappa = ridge_kappa(t->p_count, gram.dim(), params.delta);
    state.nu = t->inf_norm / t->p_min;
  } else {
    state.kappa = state.nu = 1.0;
  }

  StepRecord rec = record_prediction(gram, buf, state.theta_hat, arrivals.front(),
                                     truth.theta_star,
                                     step_deletes(buf, arrivals.size(), evictions));
  rec.lambda_delta = state.lambda_delta;
  rec.q = e.q;
  rec.beta = e.radius;
  rec.ellipsoid_valid = e.valid;
  ingest(buf, gram, arrivals, evictions, rec);
  return rec;
}

void set_lambda(WindowBuffer& buf, GramState& gram, RidgeState& state, double lambda) {
  state.lambda_delta = state.started ? lambda - state.lambda_t : 0.0;
  state.lambda_t = lambda;
  state.started = true;
  set_ridge_lambda(gram, buf, lambda);
}

}  // namespace

StepRecord fifd_ridge_step(WindowBuffer& buf, GramState& gram, RidgeState& state,
                           std::span<const Observation> arrivals, std::size_t evictions,
                           const TruthProfile& truth, const RidgeParams& params) {
  if (arrivals.empty()) throw StructuralError("fifd_ridge_step needs an arrival to predict");
  const auto ys = buf.responses();
  state.sigma_hat = estimate_sigma(ys);
  const double lambda = adaptive_lambda(state.sigma_hat, gram.x_inf_norm, buf.size(), gram.dim(),
                                        params.delta, params.theta_inf_norm);
  set_lambda(buf, gram, state, lambda);
  return ridge_predict_and_ingest(buf, gram, state, arrivals, evictions, truth, params);
}

StepRecord fixed_ridge_step(WindowBuffer& buf, GramState& gram, RidgeState& state,
                            std::span<const Observation> arrivals, std::size_t evictions,
                            const TruthProfile& truth, const RidgeParams& params,
                            double lambda_fixed) {
  if (!(lambda_fixed >= 0.0)) throw ConfigError("fixed ridge lambda must be non-negative");
  if (arrivals.empty()) throw StructuralError("fixed_ridge_step needs an arrival to predict");
  if (!state.started) {
    set_lambda(buf, gram, state, lambda_fixed);
  } else if (lambda_fixed != state.lambda_t) {
    throw ConfigError("fixed ridge lambda changed mid-run");
  }
  state.lambda_delta = 0.0;
  return ridge_predict_and_ingest(buf, gram, state, arrivals, evictions, truth, params);
}

SwitchMode switching_step(SwitchMode mode, std::size_t n_accumulated, Index d) {
  if (mode == SwitchMode::ols) return mode;
  return n_accumulated > 2 * static_cast<std::size_t>(d) ? SwitchMode::ols : SwitchMode::ridge;
}

}  // namespace fifd
