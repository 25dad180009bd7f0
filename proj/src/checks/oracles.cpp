#include "fifd/oracles.hpp"

#include <cmath>
#include <utility>

namespace fifd::oracle {

namespace {

Vector responses(const WindowBuffer& buf) {
  Vector y(static_cast<Index>(buf.size()));
  for (std::size_t i = 0; i < buf.size(); ++i) y(static_cast<Index>(i)) = buf[i].y;
  return y;
}

}  // namespace

Matrix batch_gram(const WindowBuffer& buf, Index d) {
  Matrix g = Matrix::Zero(d, d);
  for (const auto& o : buf) {
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) g(i, j) += o.x(i) * o.x(j);
    }
  }
  return g;
}

Vector batch_ols(const WindowBuffer& buf, Index d) {
  if (buf.empty()) return Vector::Zero(d);
  const Matrix X = buf.design_matrix(d);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(X);
  cod.setThreshold(1e-10);
  return cod.solve(responses(buf));
}

Vector batch_ridge(const WindowBuffer& buf, Index d, double lambda) {
  const Matrix X = buf.design_matrix(d);
  Matrix a = X.transpose() * X;
  a.diagonal().array() += lambda;
  return a.colPivHouseholderQr().solve(X.transpose() * responses(buf));
}

Matrix direct_inverse(const Matrix& m) { return m.fullPivLu().inverse(); }

long double determinant(const Matrix& m) {
  const Index n = m.rows();
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> a = m.cast<long double>();
  long double det = 1.0L;
  for (Index c = 0; c < n; ++c) {
    Index piv = c;
    for (Index r = c + 1; r < n; ++r) {
      if (std::fabs(a(r, c)) > std::fabs(a(piv, c))) piv = r;
    }
    if (a(piv, c) == 0.0L) return 0.0L;
    if (piv != c) {
      a.row(piv).swap(a.row(c));
      det = -det;
    }
    det *= a(c, c);
    for (Index r = c + 1; r < n; ++r) {
      const long double f = a(r, c) / a(c, c);
      for (Index k = c; k < n; ++k) a(r, k) -= f * a(c, k);
    }
  }
  return det;
}

long double window_sigma_hat(const WindowBuffer& buf) {
  long double mean = 0.0L;
  for (const auto& o : buf) mean += o.y;
  mean /= static_cast<long double>(buf.size());
  long double ss = 0.0L;
  for (const auto& o : buf) ss += (o.y - mean) * (o.y - mean);
  return std::sqrt(ss / static_cast<long double>(buf.size() - 1));
}

long double window_lambda(const WindowBuffer& buf, Index d, double delta, double theta_inf) {
  long double x_inf = 0.0L;
  for (const auto& o : buf) {
    for (Index i = 0; i < o.x.size(); ++i) x_inf = std::max<long double>(x_inf, std::fabs(o.x(i)));
  }
  const long double s = static_cast<long double>(buf.size());
  const long double l2 = std::log(2.0L * static_cast<long double>(d) / delta);
  return window_sigma_hat(buf) * x_inf * std::sqrt(2.0L * s * l2) / theta_inf;
}

}  // namespace fifd::oracle
