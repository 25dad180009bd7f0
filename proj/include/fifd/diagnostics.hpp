#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "fifd/step.hpp"
#include "fifd/truth.hpp"

namespace fifd {

enum class RankCase { increase, unchanged, decrease, full };
std::string_view to_string(RankCase c);

struct FrtRecord {
  double deleted_norm_sq = 0.0;
  double incoming_norm_sq = 0.0;
  double cos_sq = 0.0;
  double sin_sq = 0.0;
  double frt = 0.0;
  int rank_before = 0;
  int rank_after = 0;
  RankCase rank_case = RankCase::unchanged;
  bool in_range = true;  // frt within [0, 2]
};

// Forgetting regret term for deleting x_deleted and adding x_incoming.
// A zero weighted norm sets cos^2 = sin^2 = 0.
FrtRecord frt(const Matrix& gram_inv, const Vector& x_deleted, const Vector& x_incoming);

// Throws StructuralError when ranks differ by more than one.
RankCase rank_transition(int rank_before, int rank_after, Index d);

struct DetIdentity {
  double lhs = 0.0;  // det(I - a a^T + b b^T)
  double rhs = 0.0;  // (1 + |b|^2)(1 - |a|^2) + <a, b>^2
};
DetIdentity det_update_identity(const Vector& a, const Vector& b);

struct BoundConfig {
  Index d = 1;
  std::size_t s = 1;
  double sigma = 1.0;
  double delta = 0.05;
  double L = 1.0;
};

// sum ||x_t||^2 <= 2 eta + sum FRT + tol*T at every prefix. eta telescopes the
// per-step log determinants and strips the jumps caused by lambda changes.
struct DecompositionCheck {
  double min_slack = 0.0;
  long worst_t = 0;
  bool holds = true;
};
DecompositionCheck decomposition_check(std::span<const StepRecord> trace, double tol_per_step = 1e-6);

struct BoundReport {
  double zeta = 0.0;
  double eta_ols = 0.0;
  double eta_ridge = 0.0;
  double c2_phi = 1.0;        // value used in eta_ridge
  double log_c2_minus = 0.0;  // sum of log(1 + s*ld/(phi2 - ld))
  double log_c2_plus = 0.0;   // sum of log(1 + s*ld/(phi2 + ld))
  bool c2_reliable = true;    // every (phi2 - ld) factor and denominator positive
  bool c2_plus_reliable = true;
  double kappa = 1.0;
  double nu = 1.0;
  double bound_value = 0.0;
  double regret_actual = 0.0;    // sum of absolute losses
  double squared_regret = 0.0;   // sum of pseudo-regret
  bool holds = true;
  bool conditions_met = true;
  DecompositionCheck decomposition;
  double log_det_final = 0.0;
  double log_det_cap = 0.0;
  bool det_trace_cap_holds = true;
};

BoundReport ols_bound(std::span<const StepRecord> trace, const BoundConfig& cfg);

// truth == nullptr selects truth-free mode: kappa = nu = 1, conditions not met.
BoundReport ridge_bound(std::span<const StepRecord> trace, const BoundConfig& cfg,
                        const TruthProfile* truth);

}  // namespace fifd
