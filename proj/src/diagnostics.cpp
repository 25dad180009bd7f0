#include "fifd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fifd/ridge.hpp"

namespace fifd {

std::string_view to_string(RankCase c) {
  switch (c) {
    case RankCase::increase: return "increase";
    case RankCase::unchanged: return "unchanged";
    case RankCase::decrease: return "decrease";
    case RankCase::full: return "full";
  }
  return "unknown";
}

FrtRecord frt(const Matrix& gram_inv, const Vector& x_deleted, const Vector& x_incoming) {
  if (x_deleted.size() != gram_inv.rows() || x_incoming.size() != gram_inv.rows()) {
    throw StructuralError("frt: dimension mismatch");
  }
  FrtRecord r;
  const Vector u_del = gram_inv * x_deleted;
  r.deleted_norm_sq = std::max(0.0, x_deleted.dot(u_del));
  r.incoming_norm_sq = std::max(0.0, x_incoming.dot(gram_inv * x_incoming));
  constexpr double kZero = 1e-12;
  if (r.deleted_norm_sq > kZero && r.incoming_norm_sq > kZero) {
    const double cross = x_incoming.dot(u_del);
    r.cos_sq = std::clamp(cross * cross / (r.deleted_norm_sq * r.incoming_norm_sq), 0.0, 1.0);
    r.sin_sq = 1.0 - r.cos_sq;
  }
  r.frt = r.deleted_norm_sq * (r.incoming_norm_sq * r.sin_sq + 1.0);
  r.in_range = r.frt >= -1e-9 && r.frt <= 2.0 + 1e-9;
  return r;
}

RankCase rank_transition(int rank_before, int rank_after, Index d) {
  if (rank_before < 0 || rank_after < 0 || rank_before > d || rank_after > d) {
    throw StructuralError("rank_transition: rank outside [0, d]");
  }
  const int diff = rank_after - rank_before;
  if (diff > 1 || diff < -1) {
    throw StructuralError("rank moved by " + std::to_string(diff) + " in one step");
  }
  if (rank_before == d && rank_after == d) return RankCase::full;
  if (diff > 0) return RankCase::increase;
  if (diff < 0) return RankCase::decrease;
  return RankCase::unchanged;
}

DetIdentity det_update_identity(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw StructuralError("det_update_identity: dimension mismatch");
  const Index d = a.size();
  Matrix m = Matrix::Identity(d, d) - a * a.transpose() + b * b.transpose();
  DetIdentity out;
  out.lhs = m.determinant();
  const double ab = a.dot(b);
  out.rhs = (1.0 + b.squaredNorm()) * (1.0 - a.squaredNorm()) + ab * ab;
  return out;
}

DecompositionCheck decomposition_check(std::span<const StepRecord> trace, double tol_per_step) {
  DecompositionCheck c;
  c.min_slack = std::numeric_limits<double>::infinity();
  const double tol = tol_per_step * static_cast<double>(trace.size());
  double inc = 0.0;
  double forget = 0.0;
  double jumps = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const StepRecord& r = trace[i];
    if (i > 0) jumps += r.log_det_before - trace[i - 1].log_det_after;
    inc += r.incoming_norm_sq;
    forget += r.frt;
    const double eta = r.log_det_after - jumps;
    const double slack = 2.0 * eta + forget + tol - inc;
    if (slack < c.min_slack) {
      c.min_slack = slack;
      c.worst_t = r.t;
    }
  }
  if (trace.empty()) c.min_slack = 0.0;
  c.holds = c.min_slack >= 0.0;
  return c;
}

namespace {

void check_config(const BoundConfig& cfg) {
  if (cfg.d <= 0 || cfg.s == 0) throw ConfigError("bound config needs d > 0 and s > 0");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
}

}  // namespace

BoundReport ols_bound(std::span<const StepRecord> trace, const BoundConfig& cfg) {
  check_config(cfg);
  BoundReport b;
  const double d = static_cast<double>(cfg.d);
  const double s = static_cast<double>(cfg.s);
  const double n = static_cast<double>(trace.size());
  for (const auto& r : trace) {
    b.zeta = std::max(b.zeta, r.q);
    b.regret_actual += r.abs_loss;
    b.squared_regret += r.pseudo_regret;
    if (r.rank != cfg.d || !(r.min_eig > 0.0)) b.conditions_met = false;
  }
  const double l2 = std::log(2.0 * d / cfg.delta);
  const double cap = d * std::log(s * cfg.L * cfg.L / d);
  const double inner = (d / s) * l2 * n * (cap + n);
  b.bound_value = 2.0 * cfg.sigma * b.zeta * std::sqrt(std::max(0.0, inner));
  b.holds = b.regret_actual <= b.bound_value;
  if (!trace.empty()) {
    b.eta_ols = trace.back().log_det_after;
    b.log_det_final = b.eta_ols;
  }
  b.log_det_cap = cap;
  b.det_trace_cap_holds = b.log_det_final <= cap + 1e-9 * std::max(1.0, std::abs(cap));
  b.decomposition = decomposition_check(trace);
  return b;
}

BoundReport ridge_bound(std::span<const StepRecord> trace, const BoundConfig& cfg,
                        const TruthProfile* truth) {
  check_config(cfg);
  BoundReport b;
  const double d = static_cast<double>(cfg.d);
  const double s = static_cast<double>(cfg.s);
  const double n = static_cast<double>(trace.size());

  if (truth != nullptr && truth->p_count > 0) {
    b.kappa = ridge_kappa(truth->p_count, cfg.d, cfg.delta);
    b.nu = truth->inf_norm / truth->p_min;
    if (!wpssr_check(*truth, cfg.s, cfg.d, cfg.delta).holds) b.conditions_met = false;
  } else {
    b.conditions_met = false;
  }

  for (const auto& r : trace) {
    b.zeta = std::max(b.zeta, r.q);
    b.regret_actual += r.abs_loss;
    b.squared_regret += r.pseudo_regret;
    if (!(r.min_eig > 0.0)) b.conditions_met = false;
    const double ld = r.lambda_delta;
    if (ld == 0.0) continue;
    const double phi2 = r.min_eig / static_cast<double>(std::max<std::size_t>(r.window_size, 1));
    const double den_minus = phi2 - ld;
    const double f_minus = 1.0 + s * ld / den_minus;
    if (den_minus > 0.0 && f_minus > 0.0) {
      b.log_c2_minus += std::log(f_minus);
    } else {
      b.c2_reliable = false;
    }
    const double den_plus = phi2 + ld;
    const double f_plus = 1.0 + s * ld / den_plus;
    if (den_plus > 0.0 && f_plus > 0.0) {
      b.log_c2_plus += std::log(f_plus);
    } else {
      b.c2_plus_reliable = false;
    }
  }

  const double log_c2 = b.c2_reliable ? b.log_c2_minus : 0.0;
  b.c2_phi = std::exp(log_c2);
  const double lambda_last = trace.empty() ? 0.0 : trace.back().lambda;
  const double cap = d * std::log(s * cfg.L * cfg.L / d + lambda_last);
  b.eta_ridge = cap - log_c2;
  const double inner = (d / s) * n * (b.eta_ridge + n);
  b.bound_value = cfg.sigma * b.kappa * b.nu * b.zeta * std::sqrt(std::max(0.0, inner));
  b.holds = b.regret_actual <= b.bound_value;
  if (!trace.empty()) b.log_det_final = trace.back().log_det_after;
  b.log_det_cap = cap;
  b.det_trace_cap_holds = b.log_det_final <= cap + 1e-9 * std::max(1.0, std::abs(cap));
  b.decomposition = decomposition_check(trace);
  return b;
}

}  // namespace fifd
