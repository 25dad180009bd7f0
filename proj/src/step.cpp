#include "fifd/step.hpp"

#include <cmath>

#include "fifd/diagnostics.hpp"

namespace fifd {

bool step_deletes(const WindowBuffer& buf, std::size_t n_arrivals, std::size_t evictions) {
  if (buf.empty()) return false;
  return evictions > 0 || buf.size() + n_arrivals > buf.capacity();
}

StepRecord record_prediction(const GramState& gram, const WindowBuffer& buf,
                             const Vector& theta_hat, const Observation& incoming,
                             const Vector& theta_star, bool deletes) {
  validate(incoming, gram.dim());
  if (theta_star.size() != gram.dim() || theta_hat.size() != gram.dim()) {
    throw StructuralError("record_prediction: dimension mismatch");
  }
  StepRecord r;
  r.y = incoming.y;
  r.y_hat = theta_hat.dot(incoming.x);
  const double mean = theta_star.dot(incoming.x);
  r.abs_loss = std::abs(r.y_hat - mean);
  r.pseudo_regret = r.abs_loss * r.abs_loss;
  const Vector err = theta_hat - theta_star;
  r.l2_error = err.norm();
  r.err_phi_norm = std::sqrt(std::max(0.0, err.dot(gram.phi * err)));
  r.lambda = gram.ridge_lambda;
  r.rank = gram.rank;
  r.min_eig = gram.min_eig;
  r.window_size = buf.size();
  r.x_inf_norm = gram.x_inf_norm;
  r.log_det_before = gram.log_det;

  const Vector x_del = deletes ? buf.oldest().x : Vector::Zero(gram.dim());
  const FrtRecord f = frt(gram.inv, x_del, incoming.x);
  r.frt = f.frt;
  r.sin_sq = f.sin_sq;
  r.incoming_norm_sq = f.incoming_norm_sq;
  r.deleted_norm_sq = f.deleted_norm_sq;
  r.frt_in_range = f.in_range;
  return r;
}

void ingest(WindowBuffer& buf, GramState& gram, std::span<const Observation> arrivals,
            std::size_t evictions, StepRecord& rec) {
  update_window(buf, gram, arrivals, evictions);
  rec.rank_after = gram.rank;
  rec.log_det_after = gram.log_det;
}

}  // namespace fifd
