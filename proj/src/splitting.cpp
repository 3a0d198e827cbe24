#include "zeitlin/splitting.hpp"

#include <cmath>
#include <limits>

namespace zeitlin {

std::vector<std::pair<int, int>> EigenFrame::clusters() const {
  std::vector<std::pair<int, int>> out;
  const int n = static_cast<int>(p.size());
  int begin = 0;
  for (int k = 1; k <= n; ++k) {
    if (k == n || p[k] - p[k - 1] >= threshold) {
      out.emplace_back(begin, k);
      begin = k;
    }
  }
  return out;
}

EigenFrame eigen_frame(const Matrix& p) {
  if (p.rows() != p.cols()) throw DimensionError("eigen_frame: matrix is not square");
  const Matrix h = -kI * p;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (h + h.adjoint()));
  if (eig.info() != Eigen::Success) throw NumericError("eigen_frame: Hermitian eigensolver failed");

  EigenFrame f;
  f.E = eig.eigenvectors();
  f.p = eig.eigenvalues();
  const Eigen::Index n = f.p.size();
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index arg = 0;
    f.E.col(c).cwiseAbs().maxCoeff(&arg);
    const Complex z = f.E(arg, c);
    f.E.col(c) *= std::conj(z) / std::abs(z);
  }
  f.gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double d = f.p[k + 1] - f.p[k];
    if (d < f.gap) {
      f.gap = d;
      f.gap_index = static_cast<int>(k);
    }
  }
  f.threshold = kDegeneracyThreshold * f.p.cwiseAbs().maxCoeff();
  return f;
}

namespace {

// In-place block-diagonal extraction in frame coordinates.
void keep_blocks(Matrix& af, const EigenFrame& frame) {
  const auto blocks = frame.clusters();
  Matrix out = Matrix::Zero(af.rows(), af.cols());
  for (const auto& [b, e] : blocks) out.block(b, b, e - b, e - b) = af.block(b, b, e - b, e - b);
  af = std::move(out);
}

}  // namespace

Matrix stabilizer_project(const Matrix& a, const EigenFrame& frame) {
  Matrix af = frame.E.adjoint() * a * frame.E;
  keep_blocks(af, frame);
  return frame.E * af * frame.E.adjoint();
}

SplitState split(const Matrix& w, const Laplacian& lap) { return split(w, lap.solve(w), lap); }

SplitState split(const Matrix& w, const Matrix& p, const Laplacian& lap) {
  if (w.rows() != lap.size() || p.rows() != lap.size()) throw DimensionError("split: size mismatch");
  SplitState s;
  s.W = w;
  s.P = p;
  s.frame = eigen_frame(p);
  s.Ws = stabilizer_project(w, s.frame);
  s.Wr = w - s.Ws;

  const double wn = w.norm();
  const double residual = (lap.apply(p) - w).norm();
  if (residual > 1e-8 * wn) {
    s.warning = "stream matrix is not paired with W (relative residual " + std::to_string(residual / wn) + ")";
  } else if (s.frame.degenerate()) {
    s.warning = "degenerate stream spectrum: gap " + std::to_string(s.frame.gap) + " at eigenvalues " +
                std::to_string(s.frame.gap_index) + "," + std::to_string(s.frame.gap_index + 1) +
                "; projected blockwise";
  }
  return s;
}

Matrix compute_B(const EigenFrame& frame, const Matrix& wr, const Matrix& p, const Laplacian& lap) {
  const int n = static_cast<int>(frame.p.size());
  if (wr.norm() == 0.0) return Matrix::Zero(n, n);
  if (frame.degenerate() && n > 1)
    throw DegeneracyError("compute_B: eigenvalues " + std::to_string(frame.gap_index) + " and " +
                              std::to_string(frame.gap_index + 1) + " are degenerate (gap " +
                              std::to_string(frame.gap) + ")",
                          frame.gap_index, frame.gap_index + 1);
  const Matrix x = lap.solve(skew_commutator(p, wr));
  const Matrix y = frame.E.adjoint() * x * frame.E;
  Matrix b = Matrix::Zero(n, n);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      if (k != l) b(k, l) = kI * y(k, l) / (frame.p[k] - frame.p[l]);
  return frame.E * b * frame.E.adjoint();
}

SplitRates splitting_rhs(const SplitState& state, const Laplacian& lap) {
  SplitRates r;
  r.B = compute_B(state.frame, state.Wr, state.P, lap);
  r.dWs = skew_commutator(r.B, state.Ws) - stabilizer_project(skew_commutator(r.B, state.Wr), state.frame);
  r.dWr = skew_commutator(state.P, state.Wr) - r.dWs;
  return r;
}

EigenRates eigen_dynamics(const EigenFrame& frame, const Matrix& wr, const Matrix& p, const Laplacian& lap) {
  EigenRates r;
  const Matrix x = lap.solve(skew_commutator(p, wr));
  const Matrix y = frame.E.adjoint() * x * frame.E;
  r.pdot = (-kI * y.diagonal()).real();
  r.B = compute_B(frame, wr, p, lap);
  return r;
}

StreamSplit split_stream(const Matrix& w, const Matrix& p) {
  if (w.rows() != p.rows() || w.cols() != p.cols()) throw DimensionError("split_stream: size mismatch");
  const EigenFrame u = eigen_frame(w);
  if (u.degenerate() && u.p.size() > 1)
    throw DegeneracyError("split_stream: vorticity spectrum is degenerate at eigenvalues " +
                              std::to_string(u.gap_index) + "," + std::to_string(u.gap_index + 1),
                          u.gap_index, u.gap_index + 1);
  Matrix pf = u.E.adjoint() * p * u.E;
  StreamSplit out;
  out.Ps = u.E * Matrix(pf.diagonal().asDiagonal()) * u.E.adjoint();
  out.Pr = p - out.Ps;
  return out;
}

double stream_energy(const Matrix& q, const Laplacian& lap) {
  return 0.5 * (lap.apply(q) * q).trace().real();
}

double stream_enstrophy(const Matrix& q, const Laplacian& lap) {
  const Matrix dq = lap.apply(q);
  return -(dq * dq).trace().real();
}

}  // namespace zeitlin
