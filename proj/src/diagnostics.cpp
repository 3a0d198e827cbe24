#include "zeitlin/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace zeitlin {

std::array<double, 3> angular_momentum(const Matrix& w, const QuantizedBasis& basis) {
  const int n = basis.size();
  if (w.rows() != n || w.cols() != n) throw DimensionError("angular_momentum: size mismatch");
  const auto v0 = basis.profile(1, 0);
  const auto v1 = basis.profile(1, 1);
  Complex c10{}, c11{};
  for (int j = 0; j < n; ++j) c10 += v0[j] * w(j, j);
  for (int j = 0; j + 1 < n; ++j) c11 += v1[j] * w(j, j + 1);
  c10 *= kI;
  c11 *= kI;
  const double a = std::sqrt(2.0 * std::numbers::pi / 3.0);
  return {-2.0 * a * c11.real(), 2.0 * a * c11.imag(), std::sqrt(4.0 * std::numbers::pi / 3.0) * c10.real()};
}

InvariantRecord invariants(const Matrix& w, int k_max, const QuantizedSphere& sphere) {
  if (k_max < 2) throw InvalidTruncation("k_max must be >= 2");
  InvariantRecord rec;
  const Matrix p = sphere.laplacian().solve(w);
  rec.H = 0.5 * (p.cwiseProduct(w.transpose())).sum().real();
  rec.Ens = w.squaredNorm();

  const Matrix h = -kI * w;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericError("invariants: eigensolver failed");
  const RealVector lam = eig.eigenvalues();
  // tr(W^k) = i^k sum lambda^k; report |sum lambda^k|.
  for (int k = 2; k <= k_max; ++k) rec.C.push_back(std::abs(lam.array().pow(k).sum()));
  rec.L = angular_momentum(w, sphere.basis());
  return rec;
}

namespace {

double half_trace_product(const Matrix& a, const Matrix& b) {
  // (1/2) tr(A B) without forming the product.
  return 0.5 * (a.cwiseProduct(b.transpose())).sum().real();
}

}  // namespace

SplitDiagnostics split_diagnostics(const SplitState& state, const Laplacian& lap) {
  SplitDiagnostics d;
  d.H = half_trace_product(state.P, state.W);
  d.Ens = state.W.squaredNorm();
  d.Hs = half_trace_product(lap.solve(state.Ws), state.Ws);
  d.Hr = half_trace_product(lap.solve(state.Wr), state.Wr);
  d.Es = state.Ws.squaredNorm();
  d.Er = state.Wr.squaredNorm();
  const double sin2 = d.Ens > 0.0 ? std::clamp(d.Er / d.Ens, 0.0, 1.0) : 0.0;
  d.alpha = std::asin(std::sqrt(sin2));
  if (d.Hr > 0.0 && d.H > 0.0) {
    const double e0 = d.Ens;
    const double off = e0 * sin2 / (std::sqrt(d.Hr) * std::sqrt(d.H));
    d.gram = Gram{{{e0 / d.H, off}, {off, e0 * sin2 / d.Hr}}};
  }
  return d;
}

std::vector<std::string> check_split_identities(const SplitDiagnostics& d, int N, const IdentityTolerances& tol) {
  std::vector<std::string> bad;
  auto fail = [&](const std::string& what, double value) {
    std::ostringstream os;
    os << what << " (" << value << ")";
    bad.push_back(os.str());
  };
  if (d.Ens == 0.0) return bad;
  const double eh = std::abs(d.H - (d.Hs - d.Hr)) / d.H;
  if (!(eh <= tol.energy_identity)) fail("energy identity H = Hs - Hr", eh);
  const double ee = std::abs(d.Ens - (d.Es + d.Er)) / d.Ens;
  if (!(ee <= tol.enstrophy_identity)) fail("enstrophy identity Ens = Es + Er", ee);
  const double sin2 = std::pow(std::sin(d.alpha), 2);
  const double es = std::abs(d.Er - d.Ens * sin2) / d.Ens;
  if (!(es <= tol.sin_identity)) fail("Er = Ens sin^2(alpha)", es);

  const double sh = tol.slack * d.Ens;
  if (!(d.H > 0.0)) fail("0 < H", d.H);
  if (!(d.H <= d.Hs + sh)) fail("H <= Hs", d.Hs - d.H);
  if (!(d.Hs < d.Es + sh)) fail("Hs < Es", d.Es - d.Hs);
  if (!(d.Es <= d.Ens + sh)) fail("Es <= Ens", d.Ens - d.Es);
  if (!(d.Hr <= d.Er + sh)) fail("Hr <= Er", d.Er - d.Hr);
  if (!(static_cast<double>(N) * N * d.Hr + sh >= d.Er)) fail("N^2 Hr >= Er", N * N * d.Hr - d.Er);
  return bad;
}

double Spectrum::total() const {
  double acc = 0.0;
  for (const auto& [l, v] : H_of_l) acc += v;
  return acc;
}

double Spectrum::at(int l) const {
  for (const auto& [ll, v] : H_of_l)
    if (ll == l) return v;
  return 0.0;
}

Spectrum energy_spectrum(const Matrix& w, const QuantizedBasis& basis) {
  const SphericalCoefficients c = matrix_to_coeffs(w, basis);
  Spectrum s;
  for (int l = 1; l <= c.max_degree(); ++l) {
    double acc = 0.0;
    for (int m = -l; m <= l; ++m) acc += std::norm(c(l, m));
    s.H_of_l.emplace_back(l, acc / (2.0 * l * (l + 1)));
  }
  return s;
}

SlopeFit fit_slope(const Spectrum& spec, int l_lo, int l_hi) {
  if (l_lo >= l_hi) throw InsufficientData("fit_slope: need l_lo < l_hi");
  SlopeFit fit;
  std::vector<double> xs, ys;
  for (const auto& [l, v] : spec.H_of_l) {
    if (l < l_lo || l > l_hi) continue;
    if (v > 0.0) {
      xs.push_back(std::log(static_cast<double>(l)));
      ys.push_back(std::log(v));
    } else {
      ++fit.zeros_excluded;
    }
  }
  fit.points_used = static_cast<int>(xs.size());
  if (xs.size() < 3)
    throw InsufficientData("fit_slope: only " + std::to_string(xs.size()) + " positive values in [" +
                           std::to_string(l_lo) + ", " + std::to_string(l_hi) + "]");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

}  // namespace zeitlin
