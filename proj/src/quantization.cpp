#include "zeitlin/quantization.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace zeitlin {

namespace {

std::string dims(const Matrix& w) {
  return std::to_string(w.rows()) + "x" + std::to_string(w.cols());
}

// Solves the SPD tridiagonal system given by its LDL^T factors in place.
template <typename Vec>
void ldl_solve(const RealVector& d, const RealVector& l, Vec& x) {
  const Eigen::Index n = d.size();
  for (Eigen::Index i = 1; i < n; ++i) x[i] -= l[i - 1] * x[i - 1];
  for (Eigen::Index i = 0; i < n; ++i) x[i] /= d[i];
  for (Eigen::Index i = n - 2; i >= 0; --i) x[i] -= l[i] * x[i + 1];
}

}  // namespace

Generators build_generators(TruncationLevel level) {
  const int n = level.value();
  const double s = level.spin();
  Generators g;
  g.N = n;
  // Spin matrices S_z = diag(s..-s), S+ on the first upper diagonal.
  Matrix sz = Matrix::Zero(n, n);
  Matrix sp = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) sz(j, j) = s - j;
  for (int j = 1; j < n; ++j) {
    const double mj = s - j;
    sp(j - 1, j) = std::sqrt(s * (s + 1) - mj * (mj + 1));
  }
  const Matrix sm = sp.adjoint();
  const Matrix s1 = 0.5 * (sp + sm);
  const Matrix s2 = (sp - sm) / (2.0 * kI);
  // X_a = -i S_a gives [X1, X2] = X3.
  g.X1 = -kI * s1;
  g.X2 = -kI * s2;
  g.X3 = -kI * sz;
  return g;
}

Laplacian::Laplacian(const Generators& gen) : n_(gen.N) {
  if (gen.X1.rows() != n_ || gen.X2.rows() != n_ || gen.X3.rows() != n_)
    throw DimensionError("generators do not match N = " + std::to_string(n_));
  const double s = 0.5 * (n_ - 1);
  casimir_ = s * (s + 1);
  m_.resize(n_);
  ladder_.assign(n_, 0.0);
  // m_j = i (X3)_jj, S+ = i X1 - X2.
  for (int j = 0; j < n_; ++j) m_[j] = (kI * gen.X3(j, j)).real();
  for (int j = 0; j + 1 < n_; ++j) ladder_[j] = (kI * gen.X1(j, j + 1) - gen.X2(j, j + 1)).real();

  RealVector main, off;
  restriction(0, main, off);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(main, off, Eigen::ComputeEigenvectors);
  if (eig.info() != Eigen::Success) throw NumericError("tridiagonal eigensolver failed on diagonal 0");
  zero_diag_vectors_ = eig.eigenvectors();
  zero_diag_values_ = eig.eigenvalues();

  ldl_d_.resize(n_);
  ldl_l_.resize(n_);
  for (int d = 1; d < n_; ++d) {
    restriction(d, main, off);
    const Eigen::Index len = main.size();
    RealVector dd(len), ll(std::max<Eigen::Index>(len - 1, 0));
    dd[0] = main[0];
    for (Eigen::Index i = 1; i < len; ++i) {
      ll[i - 1] = off[i - 1] / dd[i - 1];
      dd[i] = main[i] - ll[i - 1] * off[i - 1];
    }
    ldl_d_[d] = std::move(dd);
    ldl_l_[d] = std::move(ll);
  }
}

void Laplacian::restriction(int d, RealVector& main, RealVector& off) const {
  if (d < 0 || d >= n_) throw DimensionError("diagonal index out of range: " + std::to_string(d));
  const int len = n_ - d;
  main.resize(len);
  off.resize(std::max(len - 1, 0));
  for (int j = 0; j < len; ++j) main[j] = 2.0 * casimir_ - 2.0 * m_[j] * m_[j + d];
  for (int j = 0; j + 1 < len; ++j) off[j] = -ladder_[j] * ladder_[j + d];
}

void Laplacian::check_size(const Matrix& w, const char* op) const {
  if (w.rows() != n_ || w.cols() != n_)
    throw DimensionError(std::string(op) + ": expected " + std::to_string(n_) + "x" +
                         std::to_string(n_) + " matrix, got " + dims(w));
}

Matrix Laplacian::apply(const Matrix& w) const {
  check_size(w, "laplacian_apply");
  Matrix out(n_, n_);
  for (int k = 0; k < n_; ++k) {
    for (int j = 0; j < n_; ++j) {
      Complex v = (-2.0 * casimir_ + 2.0 * m_[j] * m_[k]) * w(j, k);
      if (j + 1 < n_ && k + 1 < n_) v += ladder_[j] * ladder_[k] * w(j + 1, k + 1);
      if (j > 0 && k > 0) v += ladder_[j - 1] * ladder_[k - 1] * w(j - 1, k - 1);
      out(j, k) = v;
    }
  }
  return out;
}

Matrix Laplacian::solve(const Matrix& w) const {
  check_size(w, "laplacian_solve");
  const double norm = w.norm();
  const Complex tr = w.trace();
  if (std::abs(tr) > kTraceTolerance * norm)
    throw NotInRange("laplacian_solve: |trace| = " + std::to_string(std::abs(tr)) +
                     " exceeds tolerance for ||W|| = " + std::to_string(norm));

  Matrix p(n_, n_);
  // Diagonal 0: expand in the eigenvectors, dropping the constant l = 0 mode.
  {
    Eigen::VectorXcd rhs = w.diagonal();
    Eigen::VectorXcd coef = zero_diag_vectors_.transpose() * rhs;
    coef[0] = 0.0;
    for (int i = 1; i < n_; ++i) coef[i] /= -zero_diag_values_[i];
    p.diagonal() = zero_diag_vectors_ * coef;
  }
  Eigen::VectorXcd buf(n_);
  for (int d = 1; d < n_; ++d) {
    const int len = n_ - d;
    // upper diagonal
    for (int j = 0; j < len; ++j) buf[j] = -w(j, j + d);
    auto up = buf.head(len);
    ldl_solve(ldl_d_[d], ldl_l_[d], up);
    for (int j = 0; j < len; ++j) p(j, j + d) = up[j];
    // lower diagonal, same tridiagonal
    for (int j = 0; j < len; ++j) buf[j] = -w(j + d, j);
    ldl_solve(ldl_d_[d], ldl_l_[d], up);
    for (int j = 0; j < len; ++j) p(j + d, j) = up[j];
  }
  return p;
}

Matrix laplacian_apply(const Matrix& w, const Laplacian& lap) { return lap.apply(w); }
Matrix laplacian_solve(const Matrix& w, const Laplacian& lap) { return lap.solve(w); }

SphericalCoefficients::SphericalCoefficients(int max_degree) : max_degree_(max_degree) {
  if (max_degree < 0) throw InvalidTruncation("negative maximum degree");
  c_.assign(index(max_degree, max_degree) + 1, Complex{});
}

double SphericalCoefficients::norm_squared() const {
  double acc = 0.0;
  for (const auto& v : c_) acc += std::norm(v);
  return acc;
}

double SphericalCoefficients::reality_defect() const {
  double worst = 0.0;
  for (int l = 0; l <= max_degree_; ++l) {
    worst = std::max(worst, std::abs((*this)(l, 0).imag()));
    for (int m = 1; m <= l; ++m) {
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      worst = std::max(worst, std::abs((*this)(l, -m) - sign * std::conj((*this)(l, m))));
    }
  }
  return worst;
}

QuantizedBasis::QuantizedBasis(const Laplacian& lap) : n_(lap.size()) {
  vectors_.resize(n_);
  values_.resize(n_);
  RealVector main, off;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;

  // (S+)_{j,j+1}
  const double s = 0.5 * (n_ - 1);
  std::vector<double> a(n_, 0.0);
  for (int j = 0; j + 1 < n_; ++j) {
    const double mj1 = s - (j + 1);
    a[j] = std::sqrt(s * (s + 1) - mj1 * (mj1 + 1));
  }

  for (int m = 0; m < n_; ++m) {
    lap.restriction(m, main, off);
    eig.computeFromTridiagonal(main, off, Eigen::ComputeEigenvectors);
    if (eig.info() != Eigen::Success)
      throw NumericError("tridiagonal eigensolver failed on diagonal " + std::to_string(m));
    Eigen::MatrixXd vecs = eig.eigenvectors();
    const int len = n_ - m;
    if (m == 0) {
      for (int c = 0; c < len; ++c) {
        int first = 0;
        while (first < len && std::abs(vecs(first, c)) < 1e-12) ++first;
        if (first < len && vecs(first, c) < 0) vecs.col(c) *= -1.0;
      }
    } else {
      const Eigen::MatrixXd& prev = vectors_[m - 1];
      for (int c = 0; c < len; ++c) {
        const int l = m + c;
        // Column of R_{l,m-1} on diagonal m-1, length N-m+1.
        const auto r = prev.col(l - (m - 1));
        // [S+, R]_{j,j+m} = a_j r_{j+1} - r_j a_{j+m-1}
        double overlap = 0.0;
        for (int j = 0; j < len; ++j) overlap += vecs(j, c) * (a[j] * r[j + 1] - r[j] * a[j + m - 1]);
        if (overlap < 0) vecs.col(c) *= -1.0;
      }
    }
    // The l = 0 column of diagonal 0 is kept so indexing stays uniform.
    vectors_[m] = std::move(vecs);
    values_[m] = eig.eigenvalues();
  }
}

Eigen::Ref<const RealVector> QuantizedBasis::profile(int l, int m) const {
  if (m < 0 || m > l || l >= n_) throw DimensionError("no basis element for (l, m) = (" +
                                                       std::to_string(l) + ", " + std::to_string(m) + ")");
  return vectors_[m].col(l - m);
}

double QuantizedBasis::eigenvalue(int l, int m) const {
  if (m < 0 || m > l || l >= n_) throw DimensionError("no basis element");
  return values_[m][l - m];
}

Matrix QuantizedBasis::element(int l, int m) const {
  if (l < 1 || l >= n_ || std::abs(m) > l)
    throw DimensionError("no basis element for (l, m) = (" + std::to_string(l) + ", " +
                         std::to_string(m) + ")");
  const int am = std::abs(m);
  const auto v = profile(l, am);
  Matrix t = Matrix::Zero(n_, n_);
  if (m >= 0) {
    for (int j = 0; j < n_ - am; ++j) t(j, j + am) = -kI * v[j];
  } else {
    const double sign = (am % 2 == 0) ? 1.0 : -1.0;
    for (int j = 0; j < n_ - am; ++j) t(j + am, j) = -kI * sign * v[j];
  }
  return t;
}

QuantizedBasis build_basis(TruncationLevel n) {
  return QuantizedBasis(Laplacian(build_generators(n)));
}

Matrix coeffs_to_matrix(const SphericalCoefficients& c, const QuantizedBasis& basis) {
  const int n = basis.size();
  if (c.max_degree() >= n)
    throw TruncationOverflow("coefficients up to l = " + std::to_string(c.max_degree()) +
                             " exceed N - 1 = " + std::to_string(n - 1));
  const double scale = std::sqrt(std::max(c.norm_squared(), 1e-300));
  if (std::abs(c(0, 0)) > 1e-12 * scale)
    throw NotInRange("l = 0 coefficient must vanish for trace-free matrices");
  if (c.reality_defect() > 1e-12 * scale)
    throw SymmetryError("coefficients violate c[l][-m] = (-1)^m conj(c[l][m])");

  Matrix w = Matrix::Zero(n, n);
  for (int m = 0; m <= c.max_degree(); ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    for (int l = std::max(m, 1); l <= c.max_degree(); ++l) {
      const Complex cp = c(l, m);
      const Complex cm = c(l, -m);
      if (cp == Complex{} && cm == Complex{}) continue;
      const auto v = basis.profile(l, m);
      if (m == 0) {
        for (int j = 0; j < n; ++j) w(j, j) += -kI * cp * v[j];
      } else {
        for (int j = 0; j < n - m; ++j) {
          w(j, j + m) += -kI * cp * v[j];
          w(j + m, j) += -kI * sign * cm * v[j];
        }
      }
    }
  }
  return w;
}

SphericalCoefficients matrix_to_coeffs(const Matrix& w, const QuantizedBasis& basis) {
  const int n = basis.size();
  if (w.rows() != n || w.cols() != n) throw DimensionError("matrix_to_coeffs: size mismatch " + dims(w));
  SphericalCoefficients c(n - 1);
  for (int m = 0; m < n; ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    for (int l = std::max(m, 1); l < n; ++l) {
      const auto v = basis.profile(l, m);
      // <T, W> = sum conj(T_jk) W_jk with conj(-i v) = i v.
      Complex up{}, lo{};
      for (int j = 0; j < n - m; ++j) {
        up += v[j] * w(j, j + m);
        lo += v[j] * w(j + m, j);
      }
      c(l, m) = kI * up;
      if (m > 0) c(l, -m) = kI * sign * lo;
    }
  }
  return c;
}

double time_convert(double t_sim, TruncationLevel n) {
  return t_sim * 4.0 * std::sqrt(std::numbers::pi) / std::pow(static_cast<double>(n.value()), 1.5);
}

}  // namespace zeitlin
