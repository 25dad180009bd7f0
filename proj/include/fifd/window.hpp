#pragma once

#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "fifd/types.hpp"

namespace fifd {

struct Observation {
  Vector x;
  double y = 0.0;
};

// Throws StructuralError on wrong length, NumericalError on non-finite entries.
void validate(const Observation& obs, Index d);

// Arrival-ordered retention window. Pushing into a full buffer evicts the
// oldest item. An unbounded buffer only shrinks through evict_oldest().
class WindowBuffer {
 public:
  static constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

  explicit WindowBuffer(std::size_t capacity);

  std::optional<Observation> push(Observation obs);
  Observation evict_oldest();

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  bool full() const { return items_.size() >= capacity_; }
  const Observation& oldest() const;
  const Observation& operator[](std::size_t i) const { return items_[i]; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  std::vector<double> responses() const;
  Matrix design_matrix(Index d) const;  // n x d, rows in arrival order

 private:
  std::size_t capacity_;
  std::deque<Observation> items_;
};

struct GramSettings {
  double rank_tol = 1e-10;      // relative to the largest eigenvalue
  double downdate_tol = 1e-8;
  int refresh_interval = 500;   // pushes between forced recomputations
};

struct GramState {
  Matrix phi;
  Matrix inv;
  Vector xy_sum;
  int rank = 0;
  double min_eig = 0.0;       // smallest eigenvalue of phi
  double ridge_lambda = 0.0;
  double x_inf_norm = 0.0;    // max |x_ij| over the window

  // Ascending eigenvalues of phi - ridge_lambda*I, clamped at zero.
  Vector data_spectrum;
  double min_pos_eig = 0.0;   // smallest eigenvalue of phi above the rank cutoff
  double log_det = 0.0;       // log (pseudo-)determinant of phi
  bool inverse_exact = true;  // inv is a true inverse, safe for rank-one updates
  int pushes_since_refresh = 0;
  std::size_t fallbacks = 0;
  GramSettings settings;

  static GramState empty(Index d, double ridge_lambda = 0.0, GramSettings settings = {});
  Index dim() const { return phi.rows(); }
  bool phi_full_rank() const { return ridge_lambda > 0.0 || rank == dim(); }
};

struct SignalFallback {};

// Sherman-Morrison update: inverse of phi + x x^T given inv = phi^{-1}.
Matrix inverse_add_update(const Matrix& inv, const Vector& x_new);

// Inverse of phi - x x^T, or SignalFallback when |x^T inv x - 1| < tol.
std::variant<Matrix, SignalFallback> inverse_delete_update(const Matrix& inv, const Vector& x_old,
                                                           double tol = 1e-8);

// Moore-Penrose inverse of phi by symmetric eigendecomposition. Refreshes
// rank, min_eig, min_pos_eig, log_det and data_spectrum.
void recompute_pseudo_inverse(GramState& gram);

// Appends obs; evicts and returns the oldest item when the buffer is full.
std::optional<Observation> push(WindowBuffer& buf, GramState& gram, Observation obs);

// Ingests every arrival, then evicts `evictions` oldest items (on top of any
// capacity overflow). Inverse and spectrum are refreshed once at the end.
std::vector<Observation> update_window(WindowBuffer& buf, GramState& gram,
                                       std::span<const Observation> arrivals,
                                       std::size_t evictions);

// Moves phi to phi + (lambda - ridge_lambda) I and refreshes the inverse.
void set_ridge_lambda(GramState& gram, const WindowBuffer& buf, double lambda);

// Full rebuild of phi, xy_sum and every derived quantity from the buffer.
void rebuild(GramState& gram, const WindowBuffer& buf);

}  // namespace fifd
