#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "zeitlin/quantization.hpp"

using namespace zeitlin;

TEST_CASE("generators: spin-1/2 X3") {
  const Generators g = build_generators(TruncationLevel(2));
  CHECK(std::abs(g.X3(0, 0) - Complex(0, -0.5)) < 1e-15);
  CHECK(std::abs(g.X3(1, 1) - Complex(0, 0.5)) < 1e-15);
  CHECK(std::abs(g.X3(0, 1)) == 0.0);
}

TEST_CASE("generators: Casimir and structure constants") {
  for (int n : {3, 7, 16}) {
    const Generators g = build_generators(TruncationLevel(n));
    const double s = 0.5 * (n - 1);
    const Matrix cas = g.X1 * g.X1 + g.X2 * g.X2 + g.X3 * g.X3;
    CHECK((cas + s * (s + 1) * Matrix::Identity(n, n)).norm() < 1e-12 * n);
    CHECK((oracle::comm(g.X1, g.X2) - g.X3).norm() < 1e-12 * n);
    CHECK((oracle::comm(g.X2, g.X3) - g.X1).norm() < 1e-12 * n);
    CHECK((oracle::comm(g.X3, g.X1) - g.X2).norm() < 1e-12 * n);
    for (const Matrix* x : {&g.X1, &g.X2, &g.X3}) CHECK((*x + x->adjoint()).norm() == 0.0);
  }
}

TEST_CASE("generators: invalid truncation") {
  CHECK_THROWS_AS(TruncationLevel(1), InvalidTruncation);
  CHECK_THROWS_AS(TruncationLevel(-3), InvalidTruncation);
}

TEST_CASE("laplacian: matches the dense double-commutator oracle") {
  for (int n : {2, 5, 8, 13}) {
    const QuantizedSphere sp{TruncationLevel(n)};
    const Matrix w = oracle::random_general(n, 11 + n);
    CHECK(oracle::rel(sp.laplacian().apply(w), oracle::dense_laplacian(w)) < 1e-13);
  }
}

TEST_CASE("laplacian: identity is in the kernel") {
  const QuantizedSphere sp{TruncationLevel(9)};
  CHECK(sp.laplacian().apply(kI * Matrix::Identity(9, 9)).norm() < 1e-12);
}

TEST_CASE("laplacian: spectrum is -l(l+1) with multiplicity 2l+1") {
  for (int n : {4, 9, 20}) {
    const QuantizedSphere sp{TruncationLevel(n)};
    std::vector<double> all;
    RealVector main, off;
    for (int d = 0; d < n; ++d) {
      sp.laplacian().restriction(d, main, off);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
      eig.computeFromTridiagonal(main, off, Eigen::EigenvaluesOnly);
      const int copies = d == 0 ? 1 : 2;  // upper and lower diagonals
      for (int c = 0; c < copies; ++c)
        for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) all.push_back(eig.eigenvalues()[i]);
    }
    std::sort(all.begin(), all.end());
    REQUIRE(all.size() == static_cast<std::size_t>(n) * n);
    std::size_t k = 0;
    for (int l = 0; l < n; ++l)
      for (int c = 0; c < 2 * l + 1; ++c, ++k) CHECK(std::abs(all[k] - l * (l + 1)) < 1e-10 * (1 + l * l));
  }
}

TEST_CASE("laplacian: expansion in the basis") {
  const int n = 8;
  const QuantizedSphere sp{TruncationLevel(n)};
  const Matrix w = oracle::random_su(n, 3);
  Matrix expect = Matrix::Zero(n, n);
  for (int l = 1; l < n; ++l)
    for (int m = -l; m <= l; ++m) {
      const Matrix t = sp.basis().element(l, m);
      expect += -double(l * (l + 1)) * frobenius_inner(t, w) * t;
    }
  CHECK(oracle::rel(sp.laplacian().apply(w), expect) < 1e-12);
}

TEST_CASE("laplacian: solve round trip and trace handling") {
  for (int n : {2, 3, 12, 33}) {
    const QuantizedSphere sp{TruncationLevel(n)};
    const Matrix w = oracle::random_su(n, 5 + n);
    const Matrix p = sp.laplacian().solve(w);
    CHECK(oracle::rel(sp.laplacian().apply(p), w) < 1e-12);
    CHECK(std::abs(p.trace()) < 1e-12 * p.norm());
    CHECK(skew_defect(p) < 1e-12 * p.norm());
    CHECK(oracle::rel(sp.laplacian().solve(sp.laplacian().apply(w)), w) < 1e-12);
  }
  const QuantizedSphere sp{TruncationLevel(6)};
  CHECK(sp.laplacian().solve(Matrix::Zero(6, 6)).norm() == 0.0);
  Matrix bad = oracle::random_su(6, 1);
  bad(0, 0) += kI;
  CHECK_THROWS_AS(sp.laplacian().solve(bad), NotInRange);
  CHECK_THROWS_AS(sp.laplacian().solve(Matrix::Zero(5, 5)), DimensionError);
  CHECK_THROWS_AS(sp.laplacian().apply(Matrix::Zero(6, 7)), DimensionError);
}

TEST_CASE("laplacian: commutes with azimuthal rotation") {
  const int n = 8;
  const QuantizedSphere sp{TruncationLevel(n)};
  const Matrix w = oracle::random_su(n, 77);
  Matrix rot = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) rot(j, j) = std::exp(0.37 * sp.generators().X3(j, j));
  const Matrix lhs = sp.laplacian().apply(rot * w * rot.adjoint());
  const Matrix rhs = rot * sp.laplacian().apply(w) * rot.adjoint();
  CHECK(oracle::rel(lhs, rhs) < 1e-13);
}

TEST_CASE("basis: elements are eigenvectors, orthonormal, on their diagonal") {
  for (int n : {3, 8, 11}) {
    const QuantizedSphere sp{TruncationLevel(n)};
    std::vector<Matrix> all;
    for (int l = 1; l < n; ++l)
      for (int m = -l; m <= l; ++m) {
        const Matrix t = sp.basis().element(l, m);
        CHECK(std::abs(t.squaredNorm() - 1.0) < 1e-14);
        CHECK((sp.laplacian().apply(t) + double(l * (l + 1)) * t).norm() < 1e-11 * l * (l + 1));
        CHECK((oracle::comm(sp.generators().X3, t) + kI * double(m) * t).norm() < 1e-12 * n);
        if (m == 0) CHECK(skew_defect(t) == 0.0);
        all.push_back(t);
      }
    REQUIRE(all.size() == static_cast<std::size_t>(n * n - 1));
    double worst = 0.0;
    for (std::size_t a = 0; a < all.size(); ++a)
      for (std::size_t b = 0; b < all.size(); ++b)
        worst = std::max(worst, std::abs(frobenius_inner(all[a], all[b]) - (a == b ? 1.0 : 0.0)));
    CHECK(worst < 1e-13);
  }
}

TEST_CASE("basis: N=8 Delta T_21 = -6 T_21") {
  const QuantizedSphere sp{TruncationLevel(8)};
  const Matrix t = sp.basis().element(2, 1);
  CHECK((sp.laplacian().apply(t) + 6.0 * t).norm() < 1e-12);
}

TEST_CASE("basis: profiles agree with Wigner 3j symbols") {
  for (int n : {2, 5, 10, 17}) {
    const QuantizedSphere sp{TruncationLevel(n)};
    double worst = 0.0;
    for (int l = 1; l < n; ++l)
      for (int m = 0; m <= l; ++m) {
        const Eigen::MatrixXd r = oracle::wigner_element(n, l, m);
        const auto v = sp.basis().profile(l, m);
        for (int j = 0; j + m < n; ++j) worst = std::max(worst, std::abs(v[j] - r(j, j + m)));
      }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("basis: conjugation symmetry of negative orders") {
  const QuantizedSphere sp{TruncationLevel(7)};
  for (int l = 1; l < 7; ++l)
    for (int m = 1; m <= l; ++m) {
      const double sign = (m % 2 == 0) ? -1.0 : 1.0;  // (-1)^(m+1)
      CHECK((sp.basis().element(l, -m) - sign * sp.basis().element(l, m).adjoint()).norm() < 1e-15);
    }
}

TEST_CASE("coefficients: transforms") {
  const int n = 10;
  const QuantizedSphere sp{TruncationLevel(n)};

  SphericalCoefficients zero(5);
  CHECK(coeffs_to_matrix(zero, sp.basis()).norm() == 0.0);
  const SphericalCoefficients cz = matrix_to_coeffs(Matrix::Zero(n, n), sp.basis());
  CHECK(cz.norm_squared() == 0.0);

  SphericalCoefficients zonal(3);
  zonal(1, 0) = 2.5;
  const Matrix wz = coeffs_to_matrix(zonal, sp.basis());
  CHECK((wz - Matrix(wz.diagonal().asDiagonal())).norm() == 0.0);
  CHECK(oracle::rel(wz, 2.5 * sp.basis().element(1, 0)) < 1e-15);

  const Matrix w54 = 3.0 * sp.basis().element(5, 4);
  const SphericalCoefficients c54 = matrix_to_coeffs(w54, sp.basis());
  for (int l = 1; l < n; ++l)
    for (int m = -l; m <= l; ++m) {
      const Complex expect = (l == 5 && m == 4) ? Complex(3.0) : Complex(0.0);
      CHECK(std::abs(c54(l, m) - expect) < 1e-13);
    }

  // Random real field: round trip and Parseval.
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  SphericalCoefficients c(n - 1);
  for (int l = 1; l < n; ++l) {
    c(l, 0) = g(rng);
    for (int m = 1; m <= l; ++m) {
      c(l, m) = Complex(g(rng), g(rng));
      c(l, -m) = ((m % 2 == 0) ? 1.0 : -1.0) * std::conj(c(l, m));
    }
  }
  const Matrix w = coeffs_to_matrix(c, sp.basis());
  CHECK(skew_defect(w) < 1e-14 * w.norm());
  CHECK(std::abs(w.trace()) < 1e-13 * w.norm());
  CHECK(std::abs(w.squaredNorm() - c.norm_squared()) < 1e-12 * c.norm_squared());
  const SphericalCoefficients back = matrix_to_coeffs(w, sp.basis());
  double worst = 0.0;
  for (std::size_t k = 0; k < c.data().size(); ++k) worst = std::max(worst, std::abs(back.data()[k] - c.data()[k]));
  CHECK(worst < 1e-12);

  const Matrix rw = oracle::random_su(n, 4);
  CHECK(std::abs(matrix_to_coeffs(rw, sp.basis()).norm_squared() - rw.squaredNorm()) < 1e-12 * rw.squaredNorm());
  CHECK(oracle::rel(coeffs_to_matrix(matrix_to_coeffs(rw, sp.basis()), sp.basis()), rw) < 1e-12);
}

TEST_CASE("coefficients: errors") {
  const QuantizedSphere sp{TruncationLevel(4)};
  SphericalCoefficients big(4);
  big(4, 0) = 1.0;
  CHECK_THROWS_AS(coeffs_to_matrix(big, sp.basis()), TruncationOverflow);
  SphericalCoefficients asym(2);
  asym(1, 1) = Complex(1.0, 0.5);
  CHECK_THROWS_AS(coeffs_to_matrix(asym, sp.basis()), SymmetryError);
  SphericalCoefficients trace(2);
  trace(0, 0) = 1.0;
  CHECK_THROWS_AS(coeffs_to_matrix(trace, sp.basis()), NotInRange);
  CHECK_THROWS_AS(matrix_to_coeffs(Matrix::Zero(3, 3), sp.basis()), DimensionError);
}

TEST_CASE("time conversion") {
  CHECK(std::abs(time_convert(0.2, TruncationLevel(512)) - 1.2239e-4) < 1e-8);
  CHECK(time_convert(0.0, TruncationLevel(37)) == 0.0);
  CHECK(std::abs(time_convert(1.0, TruncationLevel(64)) - 4.0 * std::sqrt(std::numbers::pi) / 512.0) < 1e-16);
  CHECK(std::abs(time_convert(1.0, TruncationLevel(64)) - 1.3847e-2) < 1e-6);
}
