#pragma once

// Reference computations that avoid the incremental code paths. Used by the
// test suites and the verify command only.

#include "fifd/window.hpp"

namespace fifd::oracle {

Matrix batch_gram(const WindowBuffer& buf, Index d);

// Minimum-norm least squares from the raw window via complete orthogonal decomposition.
Vector batch_ols(const WindowBuffer& buf, Index d);

// Solves (X^T X + lambda I) theta = X^T y by Householder QR.
Vector batch_ridge(const WindowBuffer& buf, Index d, double lambda);

Matrix direct_inverse(const Matrix& m);

// Determinant by long-double Gaussian elimination with partial pivoting.
long double determinant(const Matrix& m);

// Adaptive lambda and sigma_hat re-derived in long double from the raw window.
long double window_sigma_hat(const WindowBuffer& buf);
long double window_lambda(const WindowBuffer& buf, Index d, double delta, double theta_inf);

}  // namespace fifd::oracle
