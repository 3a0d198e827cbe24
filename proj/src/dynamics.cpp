#include "zeitlin/dynamics.hpp"

#include <string>

namespace zeitlin {

namespace {

// The stage matrix W~ lies in u(N); its identity component is invisible to
// the stream function.
Matrix stream_of_stage(const Matrix& wt, const Laplacian& lap) {
  Matrix free = wt;
  free.diagonal().array() -= wt.trace() / static_cast<double>(wt.rows());
  return lap.solve(free);
}

}  // namespace

void StepParams::validate() const {
  if (!(h > 0.0)) throw ConfigError("step size h must be positive");
  if (!(fp_tol > 0.0)) throw ConfigError("fixed-point tolerance must be positive");
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
}

Matrix euler_zeitlin_rhs(const Matrix& w, const Laplacian& lap) {
  const Matrix p = lap.solve(w);
  return skew_commutator(p, w);
}

StepResult isospectral_midpoint_step(const Matrix& w, const StepParams& params, const Laplacian& lap) {
  params.validate();
  const double half = 0.5 * params.h;
  const double quarter = 0.25 * params.h * params.h;
  const double scale = w.norm();

  StepResult out;
  if (scale == 0.0) {
    out.W = w;
    return out;
  }

  Matrix wt = w;
  Matrix bw, comm, sandwich;
  double residual = 0.0;
  for (int it = 1; it <= params.max_iters; ++it) {
    const Matrix b = stream_of_stage(wt, lap);
    bw.noalias() = b * wt;
    comm = bw - bw.adjoint();            // [B, W~]
    sandwich.noalias() = bw * b;         // B W~ B
    Matrix next = w + half * comm + quarter * sandwich;
    residual = (next - wt).norm() / scale;
    wt = std::move(next);
    if (residual <= params.fp_tol) {
      const Matrix bf = stream_of_stage(wt, lap);
      bw.noalias() = bf * wt;
      comm = bw - bw.adjoint();
      sandwich.noalias() = bw * bf;
      out.W = wt + half * comm - quarter * sandwich;
      // Remove round-off drift out of su(N).
      out.W = 0.5 * (out.W - out.W.adjoint()).eval();
      out.W.diagonal().array() -= out.W.trace() / static_cast<double>(out.W.rows());
      out.iterations = it;
      out.residual = residual;
      return out;
    }
  }
  throw ConvergenceError("isospectral midpoint: no convergence after " + std::to_string(params.max_iters) +
                             " iterations (residual " + std::to_string(residual) + ")",
                         residual);
}

Trajectory run(const Matrix& w0, const StepParams& params, std::size_t steps, const Laplacian& lap,
               const Observer& observer, const RunOptions& options) {
  params.validate();
  if (options.stride < 1) throw ConfigError("stride must be >= 1");
  Trajectory traj;
  Matrix w = w0;
  std::size_t step = options.first_step;
  double t = options.t0;
  // Time is step * h plus a fixed offset so a resumed run reproduces t bitwise.
  const double offset = options.t0 - static_cast<double>(options.first_step) * params.h;

  auto emit = [&]() {
    if (observer) observer(step, t, w);
    if (options.record) traj.push_back({step, t, w});
  };
  emit();
  for (std::size_t i = 1; i <= steps; ++i) {
    try {
      w = isospectral_midpoint_step(w, params, lap).W;
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("step " + std::to_string(step + 1) + ": " + e.what(), e.last_residual);
    }
    ++step;
    t = static_cast<double>(step) * params.h + offset;
    if (i % options.stride == 0 || i == steps) emit();
  }
  return traj;
}

}  // namespace zeitlin
