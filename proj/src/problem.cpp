#include "ama/problem.hpp"

#include <cmath>
#include <stdexcept>

#include "ama/rng.hpp"

namespace ama {

void Problem::validate() const {
  if (!f || !g || !A) throw std::invalid_argument("Problem: missing component");
  if (f->dim() != A->cols())
    throw std::invalid_argument("Problem: f dimension does not match cols(A)");
  if (g->dim() != A->rows())
    throw std::invalid_argument("Problem: g dimension does not match rows(A)");
}

DiagonalScaling jacobi_scaling(const Problem& problem) {
  problem.validate();
  if (!problem.f->affine())
    throw std::logic_error("jacobi_scaling: requires an affine (quadratic) x-step");
  const Index m = problem.dual_dim();
  const Vec Ax0 = problem.A->apply(problem.f->solve_linear(Vec::Zero(problem.primal_dim())));

  Vec d(m);
  Vec e = Vec::Zero(m);
  Vec w(problem.primal_dim()), x(problem.primal_dim()), Ax(m);
  for (Index i = 0; i < m; ++i) {
    e[i] = 1.0;
    problem.A->applyAdjoint(e, w);
    problem.f->solve_linear(w, x);
    problem.A->apply(x, Ax);
    e[i] = 0.0;
    const double h = -(Ax[i] - Ax0[i]);
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw std::runtime_error(
          "jacobi_scaling: dual Hessian diagonal entry " + std::to_string(i) +
          " is nonpositive or non-finite; f has no curvature along this row");
    }
    d[i] = 1.0 / std::sqrt(h);
  }
  return {std::move(d)};
}

namespace {

void harmonize_blocks(const ProxOracle& g, Vec& d, Index offset) {
  if (g.separable()) return;
  if (const auto* bs = dynamic_cast<const BlockSum*>(&g)) {
    for (const auto& blk : bs->blocks()) harmonize_blocks(*blk.g, d, offset + blk.offset);
    return;
  }
  // Non-separable leaf: collapse to the geometric mean so the block admits an
  // exact rescaled prox.
  auto seg = d.segment(offset, g.dim());
  const double gm = std::exp(seg.array().log().mean());
  seg.setConstant(gm);
}

}  // namespace

ScaledProblem scale_problem(const Problem& problem, const DiagonalScaling& scaling) {
  problem.validate();
  if (scaling.d.size() != problem.dual_dim())
    throw std::invalid_argument("scale_problem: scaling size mismatch");
  if (!(scaling.d.array() > 0.0).all() || !scaling.d.allFinite())
    throw std::invalid_argument("scale_problem: scaling must be positive and finite");

  Vec d = scaling.d;
  harmonize_blocks(*problem.g, d, 0);

  ScaledProblem out;
  out.problem.f = problem.f;
  out.problem.g = problem.g->rescaled(d);
  out.problem.A = std::make_shared<RowScaledMap>(problem.A, d);
  out.d = std::move(d);
  return out;
}

OpNormEstimate dual_lipschitz(const Problem& problem, double tol, int max_iter) {
  problem.validate();
  if (!problem.f->affine())
    throw std::logic_error("dual_lipschitz: requires an affine (quadratic) x-step");
  const Index m = problem.dual_dim();
  const Vec Ax0 = problem.A->apply(problem.f->solve_linear(Vec::Zero(problem.primal_dim())));

  Rng rng(0x9e3779b97f4a7c15u);
  Vec v(m);
  for (Index i = 0; i < m; ++i) v[i] = rng.uniform(-1.0, 1.0);
  v /= v.norm();

  Vec w(problem.primal_dim()), x(problem.primal_dim()), Mv(m);
  auto apply_hessian = [&](const Vec& u) {
    problem.A->applyAdjoint(u, w);
    problem.f->solve_linear(w, x);
    problem.A->apply(x, Mv);
    Mv = Ax0 - Mv;
  };

  OpNormEstimate est;
  double prev = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    apply_hessian(v);
    est.value = Mv.norm();
    est.iterations = it + 1;
    if (est.value == 0.0) {
      est.converged = true;
      return est;
    }
    if (it > 0 && std::abs(est.value - prev) <= tol * est.value) {
      est.converged = true;
      return est;
    }
    prev = est.value;
    v = Mv / est.value;
  }
  return est;
}

}  // namespace ama
