#include "fifd/window.hpp"

#include <algorithm>
#include <cmath>

namespace fifd {

void validate(const Observation& obs, Index d) {
  if (obs.x.size() != d) {
    throw StructuralError("observation has " + std::to_string(obs.x.size()) +
                          " features, gram expects " + std::to_string(d));
  }
  if (!obs.x.allFinite() || !std::isfinite(obs.y)) {
    throw NumericalError("observation contains a non-finite value");
  }
}

WindowBuffer::WindowBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("window capacity must be positive");
}

std::optional<Observation> WindowBuffer::push(Observation obs) {
  std::optional<Observation> evicted;
  if (full()) evicted = evict_oldest();
  items_.push_back(std::move(obs));
  return evicted;
}

Observation WindowBuffer::evict_oldest() {
  if (items_.empty()) throw StructuralError("evict from an empty window");
  Observation out = std::move(items_.front());
  items_.pop_front();
  return out;
}

const Observation& WindowBuffer::oldest() const {
  if (items_.empty()) throw StructuralError("empty window has no oldest item");
  return items_.front();
}

std::vector<double> WindowBuffer::responses() const {
  std::vector<double> ys;
  ys.reserve(items_.size());
  for (const auto& o : items_) ys.push_back(o.y);
  return ys;
}

Matrix WindowBuffer::design_matrix(Index d) const {
  Matrix X(static_cast<Index>(items_.size()), d);
  Index i = 0;
  for (const auto& o : items_) X.row(i++) = o.x.transpose();
  return X;
}

GramState GramState::empty(Index d, double ridge_lambda, GramSettings settings) {
  if (d <= 0) throw ConfigError("dimension must be positive");
  if (ridge_lambda < 0.0) throw ConfigError("ridge lambda must be non-negative");
  GramState g;
  g.settings = settings;
  g.ridge_lambda = ridge_lambda;
  g.phi = Matrix::Identity(d, d) * ridge_lambda;
  g.xy_sum = Vector::Zero(d);
  g.data_spectrum = Vector::Zero(d);
  g.inv = ridge_lambda > 0.0 ? Matrix(Matrix::Identity(d, d) / ridge_lambda) : Matrix::Zero(d, d);
  g.rank = 0;
  g.min_eig = ridge_lambda;
  g.min_pos_eig = ridge_lambda;
  g.log_det = ridge_lambda > 0.0 ? static_cast<double>(d) * std::log(ridge_lambda) : 0.0;
  g.inverse_exact = ridge_lambda > 0.0;
  return g;
}

namespace {

double cutoff_for(const Vector& eigs, double rank_tol) {
  const double top = eigs.size() ? eigs.maxCoeff() : 0.0;
  return top > 0.0 ? rank_tol * top : 0.0;
}

// Fills rank, min_eig, min_pos_eig and log_det from ascending data eigenvalues.
void apply_spectrum(GramState& g, Vector eigs) {
  const double cut = cutoff_for(eigs, g.settings.rank_tol);
  const double lam = g.ridge_lambda;
  int rank = 0;
  double logdet = 0.0;
  double min_pos = 0.0;
  for (Index i = 0; i < eigs.size(); ++i) {
    const bool positive = eigs(i) > cut && eigs(i) > 0.0;
    if (!positive) eigs(i) = std::max(eigs(i), 0.0);
    if (positive) ++rank;
    if (lam > 0.0) {
      logdet += std::log(eigs(i) + lam);
    } else if (positive) {
      logdet += std::log(eigs(i));
      if (min_pos == 0.0 || eigs(i) < min_pos) min_pos = eigs(i);
    }
  }
  g.rank = rank;
  g.min_eig = std::max(eigs.minCoeff(), 0.0) + lam;
  g.min_pos_eig = lam > 0.0 ? g.min_eig : min_pos;
  g.log_det = logdet;
  g.data_spectrum = std::move(eigs);
}

Vector padded_kernel_eigenvalues(const Matrix& X, Index d) {
  Vector out = Vector::Zero(d);
  if (X.rows() == 0) return out;
  Matrix K = X * X.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(K, Eigen::EigenvaluesOnly);
  out.tail(X.rows()) = es.eigenvalues();
  std::sort(out.data(), out.data() + out.size());
  return out;
}

void refresh_spectrum(GramState& g, const WindowBuffer& buf) {
  const Index d = g.dim();
  const auto n = static_cast<Index>(buf.size());
  Vector eigs;
  if (n < d) {
    eigs = padded_kernel_eigenvalues(buf.design_matrix(d), d);
  } else {
    Matrix data = g.phi;
    data.diagonal().array() -= g.ridge_lambda;
    Eigen::SelfAdjointEigenSolver<Matrix> es(data, Eigen::EigenvaluesOnly);
    eigs = es.eigenvalues();
  }
  apply_spectrum(g, std::move(eigs));
}

bool cholesky_inverse(const Matrix& phi, Matrix& inv) {
  Eigen::LLT<Matrix> llt(phi);
  if (llt.info() != Eigen::Success) return false;
  inv = llt.solve(Matrix::Identity(phi.rows(), phi.cols()));
  return inv.allFinite();
}

Matrix pinv_from_eigen(const Matrix& phi, double rank_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(phi);
  const Vector& ev = es.eigenvalues();
  const double cut = cutoff_for(ev, rank_tol);
  Vector w = Vector::Zero(ev.size());
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > cut && ev(i) > 0.0) w(i) = 1.0 / ev(i);
  }
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
}

// Moore-Penrose inverse of X^T X through the n x n kernel X X^T.
Matrix pinv_from_kernel(const Matrix& X, double rank_tol) {
  const Index d = X.cols();
  if (X.rows() == 0) return Matrix::Zero(d, d);
  Eigen::SelfAdjointEigenSolver<Matrix> es(X * X.transpose());
  const Vector& ev = es.eigenvalues();
  const double cut = cutoff_for(ev, rank_tol);
  Index r = 0;
  for (Index i = 0; i < ev.size(); ++i) r += (ev(i) > cut && ev(i) > 0.0);
  if (r == 0) return Matrix::Zero(d, d);
  Matrix W = X.transpose() * es.eigenvectors().rightCols(r);
  W *= ev.tail(r).cwiseInverse().asDiagonal();
  return W * W.transpose();
}

void refresh_inverse(GramState& g, const WindowBuffer& buf) {
  const Index d = g.dim();
  const auto n = static_cast<Index>(buf.size());
  const double lam = g.ridge_lambda;
  if (lam > 0.0) {
    const double top = g.data_spectrum.size() ? g.data_spectrum.maxCoeff() : 0.0;
    if (n < d && lam > 1e-6 * top) {
      // (X^T X + lam I)^{-1} = (I - X^T (X X^T + lam I)^{-1} X) / lam
      const Matrix X = buf.design_matrix(d);
      Matrix K = X * X.transpose();
      K.diagonal().array() += lam;
      const Matrix S = Eigen::LLT<Matrix>(K).solve(X);
      g.inv = (Matrix::Identity(d, d) - X.transpose() * S) / lam;
    } else if (!cholesky_inverse(g.phi, g.inv)) {
      g.inv = pinv_from_eigen(g.phi, g.settings.rank_tol);
    }
  } else if (n < d) {
    g.inv = pinv_from_kernel(buf.design_matrix(d), g.settings.rank_tol);
  } else {
    g.inv = pinv_from_eigen(g.phi, g.settings.rank_tol);
  }
  g.inverse_exact = g.phi_full_rank();
  g.pushes_since_refresh = 0;
}

void add_in_place(Matrix& inv, const Vector& x) {
  const Vector u = inv * x;
  const double denom = x.dot(u) + 1.0;
  inv.noalias() -= (u / denom) * u.transpose();
}

bool delete_in_place(Matrix& inv, const Vector& x, double tol) {
  const Vector u = inv * x;
  const double denom = x.dot(u) - 1.0;
  if (std::abs(denom) < tol) return false;
  inv.noalias() -= (u / denom) * u.transpose();
  return true;
}

double abs_max(const Vector& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

Matrix inverse_add_update(const Matrix& inv, const Vector& x_new) {
  if (x_new.size() != inv.rows()) throw StructuralError("inverse_add_update: dimension mismatch");
  Matrix out = inv;
  add_in_place(out, x_new);
  return out;
}

std::variant<Matrix, SignalFallback> inverse_delete_update(const Matrix& inv, const Vector& x_old,
                                                           double tol) {
  if (x_old.size() != inv.rows()) throw StructuralError("inverse_delete_update: dimension mismatch");
  Matrix out = inv;
  if (!delete_in_place(out, x_old, tol)) return SignalFallback{};
  return out;
}

void recompute_pseudo_inverse(GramState& gram) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram.phi);
  const Vector& ev = es.eigenvalues();
  const double cut = cutoff_for(ev, gram.settings.rank_tol);
  Vector w = Vector::Zero(ev.size());
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > cut && ev(i) > 0.0) w(i) = 1.0 / ev(i);
  }
  gram.inv = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
  apply_spectrum(gram, ev.array() - gram.ridge_lambda);
  gram.inverse_exact = gram.phi_full_rank();
  gram.pushes_since_refresh = 0;
}

std::optional<Observation> push(WindowBuffer& buf, GramState& gram, Observation obs) {
  auto evicted = update_window(buf, gram, std::span<const Observation>(&obs, 1), 0);
  if (evicted.empty()) return std::nullopt;
  return std::move(evicted.front());
}

std::vector<Observation> update_window(WindowBuffer& buf, GramState& gram,
                                       std::span<const Observation> arrivals,
                                       std::size_t evictions) {
  const Index d = gram.dim();
  for (const auto& a : arrivals) validate(a, d);
  if (evictions > buf.size() + arrivals.size()) {
    throw StructuralError("cannot evict more items than the window holds");
  }

  std::vector<Observation> evicted;
  bool x_inf_stale = false;
  for (const auto& a : arrivals) {
    gram.phi.noalias() += a.x * a.x.transpose();
    gram.xy_sum += a.y * a.x;
    gram.x_inf_norm = std::max(gram.x_inf_norm, abs_max(a.x));
    if (auto old = buf.push(a)) evicted.push_back(std::move(*old));
  }
  for (std::size_t i = 0; i < evictions; ++i) evicted.push_back(buf.evict_oldest());
  for (const auto& o : evicted) {
    gram.phi.noalias() -= o.x * o.x.transpose();
    gram.xy_sum -= o.y * o.x;
    if (abs_max(o.x) >= gram.x_inf_norm) x_inf_stale = true;
  }
  if (x_inf_stale) {
    gram.x_inf_norm = 0.0;
    for (const auto& o : buf) gram.x_inf_norm = std::max(gram.x_inf_norm, abs_max(o.x));
  }

  const bool was_exact = gram.inverse_exact;
  refresh_spectrum(gram, buf);
  gram.pushes_since_refresh += static_cast<int>(arrivals.size());

  bool incremental = was_exact && gram.phi_full_rank() &&
                     gram.pushes_since_refresh < gram.settings.refresh_interval;
  if (incremental) {
    for (const auto& a : arrivals) add_in_place(gram.inv, a.x);
    for (const auto& o : evicted) {
      if (!delete_in_place(gram.inv, o.x, gram.settings.downdate_tol)) {
        ++gram.fallbacks;
        incremental = false;
        break;
      }
    }
  }
  if (!incremental) refresh_inverse(gram, buf);
  return evicted;
}

void set_ridge_lambda(GramState& gram, const WindowBuffer& buf, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("ridge lambda must be finite and non-negative");
  }
  const double step = lambda - gram.ridge_lambda;
  if (step == 0.0) return;
  gram.phi.diagonal().array() += step;
  gram.ridge_lambda = lambda;
  apply_spectrum(gram, gram.data_spectrum);
  refresh_inverse(gram, buf);
}

void rebuild(GramState& gram, const WindowBuffer& buf) {
  const Index d = gram.dim();
  const Matrix X = buf.design_matrix(d);
  Vector y(X.rows());
  for (Index i = 0; i < X.rows(); ++i) y(i) = buf[static_cast<std::size_t>(i)].y;
  gram.phi = X.transpose() * X;
  gram.phi.diagonal().array() += gram.ridge_lambda;
  gram.xy_sum = X.transpose() * y;
  gram.x_inf_norm = X.size() ? X.cwiseAbs().maxCoeff() : 0.0;
  refresh_spectrum(gram, buf);
  refresh_inverse(gram, buf);
}

}  // namespace fifd
