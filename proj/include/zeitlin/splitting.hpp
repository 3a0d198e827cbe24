#pragma once

// Canonical splitting W = Ws + Wr, where Ws is the Frobenius-orthogonal
// projection of W onto the stabilizer of the stream matrix P.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zeitlin/quantization.hpp"

namespace zeitlin {

/// Relative threshold: |p_k - p_l| < kDegeneracyThreshold * max|p| is degenerate.
inline constexpr double kDegeneracyThreshold = 1e-10;

/// Eigendecomposition P = E diag(i p) E^dagger with p ascending.  Each column
/// has its largest-magnitude entry real and positive.
struct EigenFrame {
  Matrix E;
  RealVector p;
  double gap = 0.0;        // min adjacent separation of p (inf for N = 1)
  int gap_index = 0;       // k with p[k+1] - p[k] = gap
  double threshold = 0.0;  // absolute degeneracy threshold for this frame

  bool degenerate() const noexcept { return gap < threshold; }
  /// Index ranges [begin, end) of eigenvalue clusters closer than threshold.
  std::vector<std::pair<int, int>> clusters() const;
};

EigenFrame eigen_frame(const Matrix& p);

/// Orthogonal projection onto stab_P: E blockdiag(E^dagger A E) E^dagger,
/// blocks taken over degenerate clusters (plain diagonal when generic).
Matrix stabilizer_project(const Matrix& a, const EigenFrame& frame);

struct SplitState {
  Matrix W;
  Matrix P;
  Matrix Ws;
  Matrix Wr;
  EigenFrame frame;
  std::optional<std::string> warning;  // set when the frame is degenerate
};

/// Splits W, computing P = Delta_N^{-1} W.
SplitState split(const Matrix& w, const Laplacian& lap);
/// Splits W against an explicitly paired stream matrix P.
SplitState split(const Matrix& w, const Matrix& p, const Laplacian& lap);

/// Generator B in stab_P^perp of the eigenframe motion: [B, P] = Pi_P^perp Delta_N^{-1} [P, Wr].
/// In frame coordinates b_kl = i y_kl / (p_k - p_l), b_kk = 0.
Matrix compute_B(const EigenFrame& frame, const Matrix& wr, const Matrix& p, const Laplacian& lap);

struct SplitRates {
  Matrix dWs;
  Matrix dWr;
  Matrix B;
};

/// dWs = [B, Ws] - Pi_P [B, Wr],  dWr = -[B, Ws] + Pi_P [B, Wr] + [P, Wr].
SplitRates splitting_rhs(const SplitState& state, const Laplacian& lap);

struct EigenRates {
  RealVector pdot;  // d/dt of the eigenvalues p_k
  Matrix B;         // d/dt e_k = B e_k
};

/// Eigenvalue and eigenvector motion of P along the flow, X = Delta_N^{-1}[P, W]:
/// dp_k/dt = -i e_k^dagger X e_k (P carries eigenvalues i p_k).
EigenRates eigen_dynamics(const EigenFrame& frame, const Matrix& wr, const Matrix& p, const Laplacian& lap);

struct StreamSplit {
  Matrix Ps;
  Matrix Pr;
};

/// Projection of P onto stab_W (frame of W).  Throws DegeneracyError when
/// the spectrum of W is degenerate.
StreamSplit split_stream(const Matrix& w, const Matrix& p);

/// Stream-function energy (1/2) tr(Delta_N Q Q) and enstrophy -tr((Delta_N Q)^2).
double stream_energy(const Matrix& q, const Laplacian& lap);
double stream_enstrophy(const Matrix& q, const Laplacian& lap);

}  // namespace zeitlin
