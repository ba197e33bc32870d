#pragma once

#include <memory>

#include "ama/linmap.hpp"
#include "ama/prox.hpp"
#include "ama/smooth.hpp"

namespace ama {

/// min_x f(x) + g(Ax) with f strongly convex, g proximable, A linear.
/// All members are immutable; a Problem may be shared across concurrent solves.
struct Problem {
  std::shared_ptr<const SmoothOracle> f;
  std::shared_ptr<const ProxOracle> g;
  std::shared_ptr<const LinearMap> A;

  Index primal_dim() const { return A->cols(); }
  Index dual_dim() const { return A->rows(); }

  void validate() const;
};

/// Jacobi scaling: d_i = 1 / sqrt(h_ii) with h the diagonal of the smooth dual
/// Hessian A f*'' A', probed column-wise through the x-step oracle (one x-step
/// per dual unit vector). Requires an affine oracle.
/// Throws std::runtime_error when some h_ii <= 0 or non-finite, which signals
/// a direction of no dual curvature (non-strongly-convex f along that row).
DiagonalScaling jacobi_scaling(const Problem& problem);

struct ScaledProblem {
  Problem problem;   // A -> D A, g -> g(D^{-1} .)
  Vec d;             // effective scaling actually applied
};

/// Applies a diagonal dual scaling. Non-separable g blocks only admit a
/// uniform weight, so their entries of d are collapsed to the geometric mean
/// before use; the returned d is the effective one.
/// Mapping to the original variables: y = d .* y_scaled, z = z_scaled ./ d.
ScaledProblem scale_problem(const Problem& problem, const DiagonalScaling& scaling);

/// Largest eigenvalue of the smooth dual Hessian A f*'' A' by power iteration
/// through the x-step (affine oracles only): the tight Lipschitz constant of
/// the dual gradient, used for the automatic stepsize.
OpNormEstimate dual_lipschitz(const Problem& problem, double tol = 1e-9, int max_iter = 500);

}  // namespace ama
