#pragma once

// Independent reference implementations used to derive and verify expected
// values. Everything here is deliberately brute-force and kept separate from
// the library code paths it checks.

#include <functional>
#include <optional>
#include <vector>

#include "ama/mpc.hpp"
#include "ama/problem.hpp"
#include "ama/rng.hpp"

namespace oracle {

using ama::Index;
using ama::Mat;
using ama::Vec;

/// Largest singular value from a dense SVD.
double svd_norm(const Mat& A);

/// Box-constrained QP  min 1/2 x'Hx + q'x  s.t. a <= Ax <= b, solved by
/// enumerating active sets (each row inactive / at lower / at upper) and
/// checking the KKT conditions. Exponential in rows(A); keep rows small.
struct BoxQpSolution {
  Vec x;
  Vec y;             // multipliers for the rows of A (>=0 upper, <=0 lower)
  double objective;  // primal optimal value
  bool found = false;
};
BoxQpSolution solve_box_qp(const Mat& H, const Vec& q, const Mat& A, const Vec& a, const Vec& b);

/// Random box-constrained QP in the solver's problem form (f quadratic PD,
/// g = box indicator).
struct RandomQp {
  ama::Problem problem;
  Mat H;
  Vec q;
  Mat A;
  Vec lo, hi;
};
RandomQp random_box_qp(ama::Rng& rng, Index n, Index m, double strong_convexity = 0.5);

/// Dense assembly of the smooth dual Hessian A f*'' A' by probing the x-step.
Mat dual_hessian_dense(const ama::Problem& problem);

/// Central finite difference of a scalar function of a vector.
template <typename F>
Vec central_fd(F&& f, const Vec& y, double h) {
  Vec g(y.size());
  Vec yp = y;
  for (Index i = 0; i < y.size(); ++i) {
    const double yi = y[i];
    yp[i] = yi + h;
    const double fp = f(yp);
    yp[i] = yi - h;
    const double fm = f(yp);
    yp[i] = yi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Scalar prox by golden-section minimization of lambda g(z) + 1/2 (z - v)^2.
double scalar_prox_numeric(const std::function<double(double)>& g, double v, double lambda,
                           double lo, double hi, int iters = 200);

/// Equality-constrained QP KKT solve:  min 1/2 x'Hx + c'x  s.t. E x = e.
Vec eq_qp_kkt(const Mat& H, const Vec& c, const Mat& E, const Vec& e);

/// The 1-D half-line fixture: f = x^2/2, A = 1, g = indicator{z <= 0}.
/// Symbolic forms for gamma in (0, 1): x(y) = -y and
///   y >= 0:  z = 0,              psi_gamma(y) = (1 - gamma)/2 y^2
///   y <  0:  z = (1/gamma - 1)y, psi_gamma(y) = (1/gamma - 1)/2 y^2
struct OneDFixture {
  ama::Problem problem;

  static double psi_gamma(double y, double gamma) {
    if (y >= 0.0) return 0.5 * (1.0 - gamma) * y * y;
    return 0.5 * (1.0 / gamma - 1.0) * y * y;
  }
  static double psi(double y) { return y >= 0.0 ? 0.5 * y * y : ama::kInf; }
  static double t_gamma(double y, double gamma) { return y >= 0.0 ? (1.0 - gamma) * y : 0.0; }
};
OneDFixture one_d_fixture();

/// Dynamics equality matrix/vector for an MPC spec (dense, test-sized).
void mpc_equalities(const ama::MpcSpec& spec, Mat& E, Vec& e);
ama::MpcSpec random_mpc_spec(ama::Rng& rng, Index nx, Index nu, int N, bool constrained = true);

}  // namespace oracle
