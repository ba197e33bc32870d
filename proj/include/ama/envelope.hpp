#pragma once

#include "ama/problem.hpp"

namespace ama {

/// One dual point with every quantity the solver derives from it. Caches are
/// value objects owned by a single solve and are recomputed whenever gamma
/// changes; nothing here is extrapolated.
struct IterateCache {
  Vec y;        // dual point
  Vec x;        // x(y), alternating x-minimization
  Vec z;        // z_gamma(y), alternating z-minimization
  Vec Ax;       // cached A x
  Vec r;        // Ax - z; the fixed-point residual is z - Ax = -r
  double gamma = 0.0;
  double f_val = 0.0;
  double g_val = 0.0;
  double ame = 0.0;  // psi_gamma(y) = -L_gamma(x, z, y)

  double res_inf() const { return r.size() ? r.cwiseAbs().maxCoeff() : 0.0; }
};

/// x(y) = argmin_x { f(x) + <y, Ax> }.
Vec eval_x(const Problem& problem, const Vec& y);

/// z_gamma(y) = prox_{g/gamma}(y/gamma + Ax).
Vec eval_z(const Problem& problem, const Vec& x, const Vec& y, double gamma);

/// L_gamma(x, z, y) = f(x) + g(z) + <y, Ax - z> + gamma/2 ||Ax - z||^2.
/// gamma = 0 gives the ordinary Lagrangian; returns +inf when g(z) = +inf.
double aug_lagrangian(const Problem& problem, const Vec& x, const Vec& z, const Vec& y,
                      double gamma);

/// Envelope value psi_gamma(y) together with the full iterate cache.
IterateCache ame_eval(const Problem& problem, const Vec& y, double gamma);

/// Independent evaluation of psi_gamma through the Moreau envelope of g*:
/// f*(-A'y) - gamma/2 ||Ax(y)||^2 + (g*)^gamma(y + gamma Ax(y)).
/// Requires a closed-form conjugate for g; throws std::logic_error otherwise.
double ame_alt(const Problem& problem, const Vec& y, double gamma);

/// T_gamma(y) = y + gamma (Ax - z).
Vec t_gamma(const IterateCache& cache);

/// R_gamma(y) = z - Ax = (y - T_gamma(y)) / gamma.
Vec fixed_point_residual(const IterateCache& cache);

/// Gradient diagnostic (affine f only): Q_gamma(y) R_gamma(y) with
/// Q_gamma(y) = I - gamma A f*'' A'. Throws std::logic_error for other f.
Vec grad_ame(const Problem& problem, const IterateCache& cache, double gamma);

/// Dual objective psi(y) = f*(-A'y) + g*(y); f* is evaluated through the
/// conjugate-subgradient identity f*(-A'y) = -f(x(y)) - <Ax(y), y>, g* in
/// closed form. May return +inf off dom g*; throws without a closed-form g*.
double dual_value(const Problem& problem, const IterateCache& cache);
double dual_value(const Problem& problem, const Vec& y);

}  // namespace ama
