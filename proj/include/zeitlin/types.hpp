#pragma once

#include <complex>

#include <Eigen/Dense>

namespace zeitlin {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Frobenius inner product trace(A^dagger B).
inline Complex frobenius_inner(const Matrix& a, const Matrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum();
}

/// Commutator [A, B] = AB - BA.
inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

/// Commutator of two skew-Hermitian matrices with a single product:
/// BA = (AB)^dagger when A, B are both skew-Hermitian.
inline Matrix skew_commutator(const Matrix& a, const Matrix& b) {
  Matrix ab = a * b;
  return ab - ab.adjoint();
}

/// Distance of W from the skew-Hermitian subspace, ||W + W^dagger||_F / 2.
inline double skew_defect(const Matrix& w) { return 0.5 * (w + w.adjoint()).norm(); }

}  // namespace zeitlin
