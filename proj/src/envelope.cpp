#include "ama/envelope.hpp"

#include <cmath>
#include <stdexcept>

namespace ama {

Vec eval_x(const Problem& problem, const Vec& y) {
  if (!y.allFinite()) throw std::invalid_argument("eval_x: y must be finite");
  return problem.f->solve_linear(problem.A->applyAdjoint(y));
}

Vec eval_z(const Problem& problem, const Vec& x, const Vec& y, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("eval_z: gamma must be positive");
  return problem.g->prox(y / gamma + problem.A->apply(x), 1.0 / gamma);
}

double aug_lagrangian(const Problem& problem, const Vec& x, const Vec& z, const Vec& y,
                      double gamma) {
  const double gz = problem.g->value(z);
  if (!std::isfinite(gz)) return kInf;
  const Vec r = problem.A->apply(x) - z;
  return problem.f->value(x) + gz + y.dot(r) + 0.5 * gamma * r.squaredNorm();
}

IterateCache ame_eval(const Problem& problem, const Vec& y, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("ame_eval: gamma must be positive");
  IterateCache c;
  c.gamma = gamma;
  c.y = y;
  c.x = eval_x(problem, y);
  c.Ax = problem.A->apply(c.x);
  c.z = problem.g->prox(y / gamma + c.Ax, 1.0 / gamma);
  c.r = c.Ax - c.z;
  c.f_val = problem.f->value(c.x);
  c.g_val = problem.g->value(c.z);
  c.ame = -(c.f_val + c.g_val + y.dot(c.r) + 0.5 * gamma * c.r.squaredNorm());
  return c;
}

double ame_alt(const Problem& problem, const Vec& y, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("ame_alt: gamma must be positive");
  if (!problem.g->has_conjugate())
    throw std::logic_error("ame_alt: g has no closed-form conjugate");
  const Vec x = eval_x(problem, y);
  const Vec Ax = problem.A->apply(x);
  // f*(-A'y) = -f(x(y)) - <Ax(y), y> by the conjugate-subgradient identity.
  const double fstar = -problem.f->value(x) - Ax.dot(y);
  const double env = conjugate_moreau_env(*problem.g, y + gamma * Ax, gamma);
  return fstar - 0.5 * gamma * Ax.squaredNorm() + env;
}

Vec t_gamma(const IterateCache& cache) { return cache.y + cache.gamma * cache.r; }

Vec fixed_point_residual(const IterateCache& cache) { return -cache.r; }

Vec grad_ame(const Problem& problem, const IterateCache& cache, double gamma) {
  if (!problem.f->affine())
    throw std::logic_error("grad_ame: requires an affine (quadratic) x-step");
  // Q_gamma R = R - gamma A f*'' A' R, with A f*'' A' v = -A (x(v) - x(0)).
  const Vec R = -cache.r;
  const Vec x0 = problem.f->solve_linear(Vec::Zero(problem.primal_dim()));
  const Vec xR = problem.f->solve_linear(problem.A->applyAdjoint(R));
  return R + gamma * problem.A->apply(xR - x0);
}

double dual_value(const Problem& problem, const IterateCache& cache) {
  if (!problem.g->has_conjugate())
    throw std::logic_error("dual_value: g has no closed-form conjugate");
  const double fstar = -cache.f_val - cache.Ax.dot(cache.y);
  const double gstar = problem.g->conjugate_value(cache.y);
  if (!std::isfinite(gstar)) return kInf;
  return fstar + gstar;
}

double dual_value(const Problem& problem, const Vec& y) {
  if (!problem.g->has_conjugate())
    throw std::logic_error("dual_value: g has no closed-form conjugate");
  const Vec x = eval_x(problem, y);
  const double fstar = -problem.f->value(x) - problem.A->apply(x).dot(y);
  const double gstar = problem.g->conjugate_value(y);
  if (!std::isfinite(gstar)) return kInf;
  return fstar + gstar;
}

}  // namespace ama
