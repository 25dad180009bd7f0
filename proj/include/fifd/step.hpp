#pragma once

#include <cstddef>
#include <span>

#include "fifd/window.hpp"

namespace fifd {

// One prediction step. Columns up to window_size are serialized in traces;
// the rest feed the bound evaluators.
struct StepRecord {
  long t = 0;
  double y_hat = 0.0;
  double y = 0.0;
  double pseudo_regret = 0.0;  // (<x, theta*> - y_hat)^2
  double abs_loss = 0.0;       // |y_hat - <x, theta*>|
  double cum_regret = 0.0;
  double l2_error = 0.0;
  double lambda = 0.0;
  double lambda_delta = 0.0;
  int rank = 0;
  double min_eig = 0.0;
  double frt = 0.0;
  double beta = 0.0;
  bool ellipsoid_valid = false;
  std::size_t window_size = 0;

  double q = 0.0;
  double x_inf_norm = 0.0;
  double err_phi_norm = 0.0;     // ||theta_hat - theta*||_Phi
  double incoming_norm_sq = 0.0; // ||x_t||^2 under Phi^-1
  double deleted_norm_sq = 0.0;
  double sin_sq = 0.0;
  bool frt_in_range = true;
  int rank_after = 0;
  double log_det_before = 0.0;   // log det of the gram used for the prediction
  double log_det_after = 0.0;    // log det of the post-ingest gram, same lambda
};

struct StepParams {
  double sigma = 1.0;
  double delta = 0.05;
};

// Prediction-side fields of a record, from the pre-ingest state. `deletes`
// says whether the oldest item leaves the window in this step.
StepRecord record_prediction(const GramState& gram, const WindowBuffer& buf,
                             const Vector& theta_hat, const Observation& incoming,
                             const Vector& theta_star, bool deletes);

// Ingests `arrivals` and evicts per schedule, then stores post-ingest fields.
void ingest(WindowBuffer& buf, GramState& gram, std::span<const Observation> arrivals,
            std::size_t evictions, StepRecord& rec);

// True when the step will remove the oldest window item.
bool step_deletes(const WindowBuffer& buf, std::size_t n_arrivals, std::size_t evictions);

}  // namespace fifd
