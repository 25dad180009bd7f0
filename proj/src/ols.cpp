#include "fifd/ols.hpp"

#include <cmath>

namespace fifd {

Vector ols_estimate(const GramState& gram) { return gram.inv * gram.xy_sum; }

double ols_predict(const Vector& theta_hat, const Vector& x) {
  if (theta_hat.size() != x.size()) throw StructuralError("ols_predict: dimension mismatch");
  return theta_hat.dot(x);
}

EllipsoidRadius ols_ellipsoid_radius(const GramState& gram, double sigma, double delta,
                                     std::size_t s, Index d) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (s == 0) throw ConfigError("window size must be positive");
  EllipsoidRadius out;
  const double sd = static_cast<double>(s);
  const double phi2 = gram.min_pos_eig / sd;
  out.q = phi2 > 0.0 ? gram.x_inf_norm / phi2 : 0.0;
  const double dd = static_cast<double>(d);
  out.radius = sigma * out.q * std::sqrt((2.0 * dd / sd) * std::log(2.0 * dd / delta));
  out.valid = gram.rank == d && gram.min_eig / sd > 0.0;
  return out;
}

StepRecord fifd_ols_step(WindowBuffer& buf, GramState& gram, OlsState& ols,
                         std::span<const Observation> arrivals, std::size_t evictions,
                         const Vector& theta_star, const StepParams& params) {
  if (arrivals.empty()) throw StructuralError("fifd_ols_step needs an arrival to predict");
  if (gram.ridge_lambda != 0.0) set_ridge_lambda(gram, buf, 0.0);

  ols.theta_hat = ols_estimate(gram);
  const auto e = ols_ellipsoid_radius(gram, params.sigma, params.delta, buf.size(), gram.dim());
  ols.q_adaptive = e.q;
  ols.beta_radius = e.radius;
  ols.ellipsoid_valid = e.valid;

  StepRecord rec = record_prediction(gram, buf, ols.theta_hat, arrivals.front(), theta_star,
                                     step_deletes(buf, arrivals.size(), evictions));
  rec.q = e.q;
  rec.beta = e.radius;
  rec.ellipsoid_valid = e.valid;
  ingest(buf, gram, arrivals, evictions, rec);
  return rec;
}

StepRecord fifd_ols_step(WindowBuffer& buf, GramState& gram, OlsState& ols,
                         const Observation& incoming, const Vector& theta_star,
                         const StepParams& params) {
  return fifd_ols_step(buf, gram, ols, std::span<const Observation>(&incoming, 1), 0,
                       theta_star, params);
}

}  // namespace fifd
