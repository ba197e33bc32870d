#include "oracles.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace oracle {

double svd_norm(const Mat& A) {
  return Eigen::JacobiSVD<Mat>(A).singularValues().maxCoeff();
}

BoxQpSolution solve_box_qp(const Mat& H, const Vec& q, const Mat& A, const Vec& a, const Vec& b) {
  const Index n = H.rows();
  const Index m = A.rows();
  if (m > 14) throw std::invalid_argument("solve_box_qp: too many rows to enumerate");

  BoxQpSolution best;
  // state per row: 0 inactive, 1 at lower, 2 at upper
  std::vector<int> state(m, 0);
  const double tol = 1e-8;

  long combos = 1;
  for (Index i = 0; i < m; ++i) combos *= 3;

  for (long code = 0; code < combos; ++code) {
    long c = code;
    Index k = 0;
    for (Index i = 0; i < m; ++i) {
      state[i] = static_cast<int>(c % 3);
      c /= 3;
      if (state[i] != 0) ++k;
    }
    // KKT system: H x + q + sum_{active} A_i' y_i = 0, A_i x = bound_i
    Mat K = Mat::Zero(n + k, n + k);
    Vec rhs(n + k);
    K.topLeftCorner(n, n) = H;
    rhs.head(n) = -q;
    Index row = 0;
    for (Index i = 0; i < m; ++i) {
      if (state[i] == 0) continue;
      K.block(n + row, 0, 1, n) = A.row(i);
      K.block(0, n + row, n, 1) = A.row(i).transpose();
      rhs[n + row] = state[i] == 1 ? a[i] : b[i];
      ++row;
    }
    Eigen::FullPivLU<Mat> lu(K);
    if (!lu.isInvertible()) continue;
    const Vec sol = lu.solve(rhs);
    const Vec x = sol.head(n);

    // primal feasibility of inactive rows, plus multiplier signs
    bool ok = true;
    Vec y = Vec::Zero(m);
    row = 0;
    for (Index i = 0; i < m && ok; ++i) {
      const double Ax = A.row(i).dot(x);
      if (state[i] == 0) {
        if (Ax < a[i] - tol || Ax > b[i] + tol) ok = false;
      } else {
        const double mult = sol[n + row];
        ++row;
        y[i] = mult;
        if (state[i] == 1 && mult > tol) ok = false;   // lower active: y <= 0
        if (state[i] == 2 && mult < -tol) ok = false;  // upper active: y >= 0
      }
    }
    if (!ok) continue;
    const double obj = 0.5 * x.dot(H * x) + q.dot(x);
    if (!best.found || obj < best.objective - 1e-12) {
      best.found = true;
      best.x = x;
      best.y = y;
      best.objective = obj;
    }
  }
  return best;
}

RandomQp random_box_qp(ama::Rng& rng, Index n, Index m, double strong_convexity) {
  RandomQp qp;
  Mat M(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) M(i, j) = rng.normal();
  qp.H = M.transpose() * M / static_cast<double>(n) + strong_convexity * Mat::Identity(n, n);
  qp.q = Vec::NullaryExpr(n, [&](Index) { return rng.normal(); });
  qp.A = Mat::NullaryExpr(m, n, [&](Index, Index) { return rng.normal(); }) /
         std::sqrt(static_cast<double>(n));
  qp.lo = Vec(m);
  qp.hi = Vec(m);
  for (Index i = 0; i < m; ++i) {
    const double c = rng.uniform(-0.5, 0.5);
    const double w = rng.uniform(0.1, 1.5);
    qp.lo[i] = c - w;
    qp.hi[i] = c + w;
  }
  qp.problem.f = std::make_shared<ama::QuadraticOracle>(qp.H, qp.q);
  qp.problem.g = std::make_shared<ama::BoxIndicator>(qp.lo, qp.hi);
  qp.problem.A = std::make_shared<ama::DenseMap>(qp.A);
  return qp;
}

Mat dual_hessian_dense(const ama::Problem& problem) {
  const Index m = problem.dual_dim();
  const Vec Ax0 = problem.A->apply(problem.f->solve_linear(Vec::Zero(problem.primal_dim())));
  Mat Hd(m, m);
  Vec e = Vec::Zero(m);
  for (Index i = 0; i < m; ++i) {
    e[i] = 1.0;
    const Vec x = problem.f->solve_linear(problem.A->applyAdjoint(e));
    Hd.col(i) = Ax0 - problem.A->apply(x);
    e[i] = 0.0;
  }
  return Hd;
}

double scalar_prox_numeric(const std::function<double(double)>& g, double v, double lambda,
                           double lo, double hi, int iters) {
  auto obj = [&](double z) { return lambda * g(z) + 0.5 * (z - v) * (z - v); };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = obj(c), fd = obj(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = obj(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = obj(d);
    }
  }
  return 0.5 * (a + b);
}

Vec eq_qp_kkt(const Mat& H, const Vec& c, const Mat& E, const Vec& e) {
  const Index n = H.rows(), p = E.rows();
  Mat K = Mat::Zero(n + p, n + p);
  K.topLeftCorner(n, n) = H;
  K.topRightCorner(n, p) = E.transpose();
  K.bottomLeftCorner(p, n) = E;
  Vec rhs(n + p);
  rhs.head(n) = -c;
  rhs.tail(p) = e;
  return Eigen::PartialPivLU<Mat>(K).solve(rhs).head(n);
}

OneDFixture one_d_fixture() {
  OneDFixture fx;
  fx.problem.f = std::make_shared<ama::QuadraticOracle>(Mat::Identity(1, 1), Vec::Zero(1));
  fx.problem.g = ama::make_orthant_nonpositive(1);
  fx.problem.A = std::make_shared<ama::DenseMap>(Mat::Identity(1, 1));
  return fx;
}

void mpc_equalities(const ama::MpcSpec& spec, Mat& E, Vec& e) {
  const Index n = spec.traj_dim();
  const Index rows = (spec.N + 1) * spec.nx;
  E = Mat::Zero(rows, n);
  e = Vec::Zero(rows);
  E.topLeftCorner(spec.nx, spec.nx) = Mat::Identity(spec.nx, spec.nx);
  e.head(spec.nx) = spec.x_init;
  for (int i = 0; i < spec.N; ++i) {
    const Index r = (i + 1) * spec.nx;
    E.block(r, spec.x_offset(i), spec.nx, spec.nx) = -spec.Phi_at(i);
    E.block(r, spec.u_offset(i), spec.nx, spec.nu) = -spec.Gamma_at(i);
    E.block(r, spec.x_offset(i + 1), spec.nx, spec.nx) = Mat::Identity(spec.nx, spec.nx);
    e.segment(r, spec.nx) = spec.c_at(i);
  }
}

ama::MpcSpec random_mpc_spec(ama::Rng& rng, Index nx, Index nu, int N, bool constrained) {
  ama::MpcSpec spec;
  spec.N = N;
  spec.nx = nx;
  spec.nu = nu;
  Mat Phi = Mat::NullaryExpr(nx, nx, [&](Index, Index) { return rng.normal(); });
  Phi *= 0.9 / std::max(1.0, svd_norm(Phi));  // keep the rollout well-scaled
  Mat Gam = Mat::NullaryExpr(nx, nu, [&](Index, Index) { return rng.normal(); });
  spec.Phi = {Phi};
  spec.Gamma = {Gam};
  Vec cvec = Vec::NullaryExpr(nx, [&](Index) { return 0.1 * rng.normal(); });
  spec.c = {cvec};

  Mat Mq = Mat::NullaryExpr(nx, nx, [&](Index, Index) { return rng.normal(); });
  spec.Q = {Mat(Mq.transpose() * Mq / static_cast<double>(nx) + 0.2 * Mat::Identity(nx, nx))};
  Mat Mr = Mat::NullaryExpr(nu, nu, [&](Index, Index) { return rng.normal(); });
  spec.R = {Mat(Mr.transpose() * Mr / static_cast<double>(nu) + 0.3 * Mat::Identity(nu, nu))};
  Mat Mn = Mat::NullaryExpr(nx, nx, [&](Index, Index) { return rng.normal(); });
  spec.QN = Mn.transpose() * Mn / static_cast<double>(nx) + 0.5 * Mat::Identity(nx, nx);
  spec.x_init = Vec::NullaryExpr(nx, [&](Index) { return rng.normal(); });
  spec.x_ref = {Vec::NullaryExpr(nx, [&](Index) { return 0.3 * rng.normal(); })};

  if (constrained) {
    Mat Lx(nx, nx + nu);
    Lx << Mat::Identity(nx, nx), Mat::Zero(nx, nu);
    Mat Lu(nu, nx + nu);
    Lu << Mat::Zero(nu, nx), Mat::Identity(nu, nu);
    auto xbox = std::make_shared<ama::BoxIndicator>(Vec::Constant(nx, -3.0), Vec::Constant(nx, 3.0));
    auto ubox = std::make_shared<ama::BoxIndicator>(Vec::Constant(nu, -1.0), Vec::Constant(nu, 1.0));
    spec.stage_con.resize(N);
    spec.stage_con[0] = {{Lu, ubox}};
    for (int i = 1; i < N; ++i) spec.stage_con[i] = {{Lx, xbox}, {Lu, ubox}};
    spec.terminal_con = {{Mat::Identity(nx, nx),
                          std::make_shared<ama::BoxIndicator>(Vec::Constant(nx, -3.0),
                                                              Vec::Constant(nx, 3.0))}};
  }
  return spec;
}

}  // namespace oracle
