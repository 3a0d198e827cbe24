#pragma once

// Conserved quantities, energy/enstrophy splitting diagnostics and spectra.

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zeitlin/quantization.hpp"
#include "zeitlin/splitting.hpp"

namespace zeitlin {

struct InvariantRecord {
  double H = 0.0;             // (1/2) tr(P W)
  double Ens = 0.0;           // -tr(W^2) = ||W||_F^2
  std::vector<double> C;      // |tr W^k| for k = 2..k_max (C[0] is k = 2)
  std::array<double, 3> L{};  // angular momentum from the l = 1 coefficients
};

/// k_max >= 2.  Casimirs are evaluated from the spectrum of W.
InvariantRecord invariants(const Matrix& w, int k_max, const QuantizedSphere& sphere);

/// Angular momentum (Lx, Ly, Lz) = integral of omega * n, from c[1][m].
std::array<double, 3> angular_momentum(const Matrix& w, const QuantizedBasis& basis);

/// Enstrophy-norm Gram matrix of the (W, Wr) plane in energy-normalized
/// coordinates.  Absent in a steady state (Hr = 0).
using Gram = std::array<std::array<double, 2>, 2>;

struct SplitDiagnostics {
  double H = 0.0, Ens = 0.0;
  double Hs = 0.0, Hr = 0.0, Es = 0.0, Er = 0.0;
  double alpha = 0.0;  // enstrophy-norm angle between W and Ws, sin^2 = Er / Ens
  std::optional<Gram> gram;
};

SplitDiagnostics split_diagnostics(const SplitState& state, const Laplacian& lap);

/// Tolerances for the splitting identities and inequality chain.
struct IdentityTolerances {
  double energy_identity = 1e-10;     // |H - (Hs - Hr)| / H
  double enstrophy_identity = 1e-12;  // |Ens - (Es + Er)| / Ens
  double sin_identity = 1e-10;        // |Er - Ens sin^2 alpha| / Ens
  double slack = 1e-12;               // relative slack on inequalities
};

/// Human-readable list of violated identities; empty when all hold.
std::vector<std::string> check_split_identities(const SplitDiagnostics& d, int N,
                                                const IdentityTolerances& tol = {});

/// Energy per degree l = 1..N-1; value(l) = sum_m |c_lm|^2 / (2 l (l+1)).
struct Spectrum {
  std::vector<std::pair<int, double>> H_of_l;

  double total() const;
  double at(int l) const;
};

Spectrum energy_spectrum(const Matrix& w, const QuantizedBasis& basis);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points_used = 0;
  int zeros_excluded = 0;
};

/// Least-squares slope of log H(l) against log l over [l_lo, l_hi].
/// Throws InsufficientData when fewer than three positive values remain.
SlopeFit fit_slope(const Spectrum& spec, int l_lo, int l_hi);

}  // namespace zeitlin
