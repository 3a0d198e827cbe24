#pragma once

// Quantized geometry of the sphere at truncation level N: su(2) generators,
// the Hoppe-Yau Laplacian and the quantized spherical harmonics T_lm.

#include <cstddef>
#include <vector>

#include "zeitlin/error.hpp"
#include "zeitlin/types.hpp"

namespace zeitlin {

/// Matrix size N >= 2; hbar = 1/N.
class TruncationLevel {
 public:
  explicit TruncationLevel(int n) : n_(n) {
    if (n < 2) throw InvalidTruncation("truncation level N must be >= 2, got " + std::to_string(n));
  }
  int value() const noexcept { return n_; }
  /// Spin s = (N-1)/2 of the irreducible representation.
  double spin() const noexcept { return 0.5 * (n_ - 1); }
  friend bool operator==(TruncationLevel, TruncationLevel) = default;

 private:
  int n_;
};

/// Anti-Hermitian su(2) generators with [X1,X2]=X3 (cyclic) and
/// X3 = -i diag(s, s-1, ..., -s).
struct Generators {
  int N = 0;
  Matrix X1, X2, X3;
};

Generators build_generators(TruncationLevel n);

/// Hoppe-Yau Laplacian Delta_N W = sum_a [X_a, [X_a, W]].
///
/// Delta_N maps each matrix diagonal to itself; on the d-th diagonal (upper
/// or lower) it acts as a symmetric tridiagonal matrix of size N-d.  The
/// restriction of -Delta_N to diagonal d has eigenvalues l(l+1), l = d..N-1.
/// Solves run one tridiagonal factorization per diagonal, O(N^2) in total.
class Laplacian {
 public:
  explicit Laplacian(const Generators& gen);

  int size() const noexcept { return n_; }

  /// Main diagonal and off diagonal of -Delta_N restricted to diagonal d.
  void restriction(int d, RealVector& main, RealVector& off) const;

  Matrix apply(const Matrix& w) const;
  /// Solves Delta_N P = W on trace-free matrices, returns trace-free P.
  Matrix solve(const Matrix& w) const;

 private:
  void check_size(const Matrix& w, const char* op) const;

  int n_;
  double casimir_;                     // s(s+1)
  std::vector<double> m_;              // X3 weights s - j
  std::vector<double> ladder_;         // (S+)_{j,j+1}, ladder_[N-1] = 0
  Eigen::MatrixXd zero_diag_vectors_;  // eigenvectors for diagonal 0, l = 0..N-1
  RealVector zero_diag_values_;
  // LDL^T of -Delta_N on diagonals d >= 1.
  std::vector<RealVector> ldl_d_;
  std::vector<RealVector> ldl_l_;
};

/// Relative tolerance on |trace W| / ||W||_F before a solve rejects W.
inline constexpr double kTraceTolerance = 1e-10;

Matrix laplacian_apply(const Matrix& w, const Laplacian& lap);
Matrix laplacian_solve(const Matrix& w, const Laplacian& lap);

/// Coefficients c[l][m], 0 <= l <= L, |m| <= l.  The l = 0 slot exists for
/// indexing only and must stay zero for trace-free fields.
class SphericalCoefficients {
 public:
  explicit SphericalCoefficients(int max_degree);

  int max_degree() const noexcept { return max_degree_; }
  static std::size_t index(int l, int m) {
    return static_cast<std::size_t>(l * l + l + m);
  }

  Complex& operator()(int l, int m) { return c_[index(l, m)]; }
  const Complex& operator()(int l, int m) const { return c_[index(l, m)]; }

  double norm_squared() const;
  /// max over (l, m>0) of |c[l][-m] - (-1)^m conj(c[l][m])| plus |Im c[l][0]|.
  double reality_defect() const;

  const std::vector<Complex>& data() const noexcept { return c_; }

 private:
  int max_degree_;
  std::vector<Complex> c_;
};

/// Frobenius-orthonormal eigenbasis T_lm of Delta_N, 1 <= l <= N-1.
///
/// For m >= 0, T_lm = -i R_lm where R_lm is real and lives on the m-th upper
/// diagonal; T_{l,-m} = (-1)^{m+1} T_lm^dagger so that real fields map to
/// skew-Hermitian matrices.  Per-diagonal signs follow the angular-momentum
/// ladder T_lm ∝ [S+, T_{l,m-1}], anchored by a positive first component of
/// R_l0; this is the Wigner 3j convention and matches Y_lm with the
/// Condon-Shortley phase.
class QuantizedBasis {
 public:
  explicit QuantizedBasis(const Laplacian& lap);

  int size() const noexcept { return n_; }
  int max_degree() const noexcept { return n_ - 1; }

  /// Real profile of R_lm (m >= 0) along the m-th upper diagonal, length N-m.
  Eigen::Ref<const RealVector> profile(int l, int m) const;
  /// Eigenvalue of -Delta_N computed for (l, m >= 0).
  double eigenvalue(int l, int m) const;
  /// Dense T_lm for -l <= m <= l.
  Matrix element(int l, int m) const;

 private:
  int n_;
  std::vector<Eigen::MatrixXd> vectors_;  // per m, column l-m
  std::vector<RealVector> values_;
};

QuantizedBasis build_basis(TruncationLevel n);

/// W = sum c[l][m] T_lm.
Matrix coeffs_to_matrix(const SphericalCoefficients& c, const QuantizedBasis& basis);
/// c[l][m] = <T_lm, W>, with max degree N-1.
SphericalCoefficients matrix_to_coeffs(const Matrix& w, const QuantizedBasis& basis);

/// Simulation time to seconds: t * 4 sqrt(pi) / N^{3/2}.
double time_convert(double t_sim, TruncationLevel n);

/// Generators, Laplacian and basis for one N, immutable after construction.
class QuantizedSphere {
 public:
  explicit QuantizedSphere(TruncationLevel n)
      : level_(n), gen_(build_generators(n)), lap_(gen_), basis_(lap_) {}

  int size() const noexcept { return level_.value(); }
  TruncationLevel level() const noexcept { return level_; }
  const Generators& generators() const noexcept { return gen_; }
  const Laplacian& laplacian() const noexcept { return lap_; }
  const QuantizedBasis& basis() const noexcept { return basis_; }

 private:
  TruncationLevel level_;
  Generators gen_;
  Laplacian lap_;
  QuantizedBasis basis_;
};

}  // namespace zeitlin
