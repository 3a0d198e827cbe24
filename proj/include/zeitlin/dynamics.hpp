#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "zeitlin/quantization.hpp"

namespace zeitlin {

struct StepParams {
  double h = 0.2;          // simulation time units
  double fp_tol = 1e-12;   // Frobenius-relative Picard tolerance
  int max_iters = 100;

  void validate() const;
};

struct StepResult {
  Matrix W;
  int iterations = 0;
  double residual = 0.0;  // last successive-iterate distance / ||W_n||
};

/// [P, W] with P = Delta_N^{-1} W.
Matrix euler_zeitlin_rhs(const Matrix& w, const Laplacian& lap);

/// One step of the isospectral midpoint method.
///
/// Solves W~ = W_n + h/2 [B, W~] + h^2/4 B W~ B with B = Delta_N^{-1} W~ by
/// Picard iteration, then W_{n+1} = W~ + h/2 [B, W~] - h^2/4 B W~ B, which is
/// the conjugation (I + hB/2) W~ (I - hB/2) and preserves the spectrum.
/// Throws ConvergenceError if max_iters is reached.
StepResult isospectral_midpoint_step(const Matrix& w, const StepParams& params, const Laplacian& lap);

struct TrajectorySample {
  std::size_t step = 0;
  double t = 0.0;
  Matrix W;
};

using Trajectory = std::vector<TrajectorySample>;

/// Called with (step index, t, W) at the configured stride, including step 0
/// and the final step.
using Observer = std::function<void(std::size_t, double, const Matrix&)>;

struct RunOptions {
  std::size_t stride = 1;          // observer and recording stride
  bool record = true;              // keep sampled matrices in the trajectory
  std::size_t first_step = 0;      // step index of W0 when resuming
  double t0 = 0.0;
};

/// Advances W0 by `steps` isospectral midpoint steps.  Step failures are
/// rethrown as ConvergenceError naming the failing step index.
Trajectory run(const Matrix& w0, const StepParams& params, std::size_t steps, const Laplacian& lap,
               const Observer& observer = {}, const RunOptions& options = {});

}  // namespace zeitlin
