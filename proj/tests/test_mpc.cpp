#include <doctest.h>

#include "ama/bench.hpp"
#include "ama/mpc.hpp"
#include "ama/solver.hpp"
#include "oracles.hpp"

using namespace ama;

namespace {

MpcSpec scalar_spec(int N) {
  MpcSpec spec;
  spec.N = N;
  spec.nx = 1;
  spec.nu = 1;
  spec.Phi = {Mat::Identity(1, 1)};
  spec.Gamma = {Mat::Identity(1, 1)};
  spec.Q = {Mat::Identity(1, 1)};
  spec.R = {Mat::Identity(1, 1)};
  spec.QN = Mat::Identity(1, 1);
  spec.x_init = Vec::Zero(1);
  Mat Lu(1, 2);
  Lu << 0, 1;
  spec.stage_con.assign(N, {{Lu, std::make_shared<BoxIndicator>(Vec::Constant(1, -10.0),
                                                                Vec::Constant(1, 10.0))}});
  return spec;
}

}  // namespace

TEST_CASE("one-step scalar Riccati by hand") {
  const MpcSpec spec = scalar_spec(1);
  const RiccatiFactor f = riccati_factor(spec);
  CHECK(f.P[1](0, 0) == doctest::Approx(1.0));
  // K0 = (R + G'P1G)^{-1} G'P1 Phi = 0.5
  CHECK(f.K[0](0, 0) == doctest::Approx(0.5).epsilon(1e-14));

  // y = 0, x_init = 1: minimize x0^2/2 + u0^2/2 + x1^2/2, x1 = x0 + u0
  MpcSpec s2 = spec;
  s2.x_init = Vec::Constant(1, 1.0);
  const RiccatiFactor f2 = riccati_factor(s2);
  const Vec traj = riccati_solve(f2, s2, Vec::Zero(1));
  CHECK(traj[0] == doctest::Approx(1.0));
  CHECK(traj[1] == doctest::Approx(-0.5).epsilon(1e-14));  // u0
  CHECK(traj[2] == doctest::Approx(0.5).epsilon(1e-14));   // x1
}

TEST_CASE("N = 0: the factor is just the terminal cost") {
  MpcSpec spec;
  spec.N = 0;
  spec.nx = 2;
  spec.nu = 0;
  spec.QN = 2.0 * Mat::Identity(2, 2);
  spec.x_init = Vec::Constant(2, 0.7);
  spec.terminal_con = {{Mat::Identity(2, 2),
                        std::make_shared<BoxIndicator>(Vec::Constant(2, -1.0),
                                                       Vec::Constant(2, 1.0))}};
  const RiccatiFactor f = riccati_factor(spec);
  REQUIRE(f.P.size() == 1);
  CHECK((f.P[0] - spec.QN).cwiseAbs().maxCoeff() == 0.0);
  const Vec traj = riccati_solve_linear(f, spec, Vec::Zero(2));
  CHECK((traj - spec.x_init).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cost-to-go matrices are symmetric PSD on random stable systems") {
  Rng rng(5);
  const MpcSpec spec = oracle::random_mpc_spec(rng, 4, 2, 8);
  const RiccatiFactor f = riccati_factor(spec);
  for (const Mat& P : f.P) {
    CHECK((P - P.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + P.cwiseAbs().maxCoeff()));
    Eigen::SelfAdjointEigenSolver<Mat> es(P, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("riccati_solve matches the dense KKT oracle") {
  Rng rng(9);
  for (int rep = 0; rep < 8; ++rep) {
    const Index nx = 2 + rep % 4;
    const Index nu = 1 + rep % 2;
    const int N = 3 + rep % 5;
    const MpcSpec spec = oracle::random_mpc_spec(rng, nx, nu, N);
    const RiccatiFactor f = riccati_factor(spec);
    const MpcProblem mp = build_problem(spec);

    Mat E;
    Vec e;
    oracle::mpc_equalities(spec, E, e);
    // dense Hessian and linear term of the stage costs
    const Index n = spec.traj_dim();
    Mat H = Mat::Zero(n, n);
    Vec lin = Vec::Zero(n);
    for (int i = 0; i < N; ++i) {
      H.block(spec.x_offset(i), spec.x_offset(i), nx, nx) = spec.Q_at(i);
      H.block(spec.u_offset(i), spec.u_offset(i), nu, nu) = spec.R_at(i);
      lin.segment(spec.x_offset(i), nx) = -spec.Q_at(i) * spec.x_ref_at(i);
      lin.segment(spec.u_offset(i), nu) = -spec.R_at(i) * spec.u_ref_at(i);
    }
    H.block(spec.x_offset(N), spec.x_offset(N), nx, nx) = spec.QN;
    lin.segment(spec.x_offset(N), nx) = -spec.QN * spec.x_ref_at(N);

    for (int t = 0; t < 5; ++t) {
      Vec y = Vec::NullaryExpr(mp.problem.dual_dim(), [&](Index) { return rng.normal(); });
      const Vec traj = riccati_solve(f, spec, y);
      const Vec ref = oracle::eq_qp_kkt(H, lin + mp.problem.A->applyAdjoint(y), E, e);
      CHECK((traj - ref).cwiseAbs().maxCoeff() <=
            1e-8 * (1.0 + ref.cwiseAbs().maxCoeff()));
      // dynamics hold exactly along the sweep
      CHECK((E * traj - e).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + traj.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("the y -> trajectory map is affine") {
  Rng rng(13);
  const MpcSpec spec = oracle::random_mpc_spec(rng, 3, 2, 6);
  const RiccatiFactor f = riccati_factor(spec);
  const MpcProblem mp = build_problem(spec);
  const Index m = mp.problem.dual_dim();
  for (int t = 0; t < 10; ++t) {
    Vec y1 = Vec::NullaryExpr(m, [&](Index) { return rng.normal(); });
    Vec y2 = Vec::NullaryExpr(m, [&](Index) { return rng.normal(); });
    const double lam = rng.uniform(0.0, 1.0);
    const Vec lhs = riccati_solve(f, spec, lam * y1 + (1.0 - lam) * y2);
    const Vec rhs = lam * riccati_solve(f, spec, y1) + (1.0 - lam) * riccati_solve(f, spec, y2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + rhs.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("riccati oracle satisfies subspace stationarity") {
  Rng rng(17);
  const MpcSpec spec = oracle::random_mpc_spec(rng, 4, 2, 6);
  const MpcProblem mp = build_problem(spec);
  const auto* oracle_f = dynamic_cast<const RiccatiOracle*>(mp.problem.f.get());
  REQUIRE(oracle_f);

  // basis of the homogeneous dynamics subspace (x0 = 0): one rollout per
  // input coordinate
  const Index n = spec.traj_dim();
  const Index nfree = spec.nu * spec.N;
  Mat Z = Mat::Zero(n, nfree);
  Index col = 0;
  for (int i = 0; i < spec.N; ++i) {
    for (Index j = 0; j < spec.nu; ++j, ++col) {
      Vec xk = Vec::Zero(spec.nx);
      for (int t = 0; t < spec.N; ++t) {
        Z.block(spec.x_offset(t), col, spec.nx, 1) = xk;
        Vec u = Vec::Zero(spec.nu);
        if (t == i) u[j] = 1.0;
        Z.block(spec.u_offset(t), col, spec.nu, 1) = u;
        xk = spec.Phi_at(t) * xk + spec.Gamma_at(t) * u;
      }
      Z.block(spec.x_offset(spec.N), col, spec.nx, 1) = xk;
    }
  }

  // dense gradient of the stage costs at the sweep output + the dual term
  for (int t = 0; t < 5; ++t) {
    Vec y = Vec::NullaryExpr(mp.problem.dual_dim(), [&](Index) { return rng.normal(); });
    const Vec v = mp.problem.A->applyAdjoint(y);
    const Vec traj = mp.problem.f->solve_linear(v);
    Vec grad = v;
    for (int i = 0; i < spec.N; ++i) {
      grad.segment(spec.x_offset(i), spec.nx) +=
          spec.Q_at(i) * (traj.segment(spec.x_offset(i), spec.nx) - spec.x_ref_at(i));
      grad.segment(spec.u_offset(i), spec.nu) +=
          spec.R_at(i) * (traj.segment(spec.u_offset(i), spec.nu) - spec.u_ref_at(i));
    }
    grad.segment(spec.x_offset(spec.N), spec.nx) +=
        spec.QN * (traj.segment(spec.x_offset(spec.N), spec.nx) - spec.x_ref_at(spec.N));
    CHECK((Z.transpose() * grad).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + grad.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("build_problem block structure matches stage constraints") {
  Rng rng(21);
  const MpcSpec spec = oracle::random_mpc_spec(rng, 3, 1, 4);
  const MpcProblem mp = build_problem(spec);
  // stage 0 inputs only, stages 1..N-1 state+input boxes, terminal box
  CHECK(mp.problem.dual_dim() == 1 + 3 * (3 + 1) + 3);
  CHECK(mp.stage_offsets.front() == 0);
  CHECK(mp.stage_offsets.back() == mp.problem.dual_dim());

  // prox acts stage-wise as a clamp (identity stage maps, hard boxes)
  Vec v = Vec::NullaryExpr(mp.problem.dual_dim(), [&](Index) { return 6.0 * rng.normal(); });
  const Vec p = mp.problem.g->prox(v, 1.0);
  CHECK(p.cwiseAbs().maxCoeff() <= 3.0 + 1e-12);
}

TEST_CASE("scalar MPC solve matches the dense box-QP oracle") {
  // x-next = x + u, quadratic costs, input box: condense to a QP in (x0,u0,x1)
  MpcSpec spec = scalar_spec(1);
  spec.x_init = Vec::Constant(1, 2.0);
  spec.stage_con[0] = {{(Mat(1, 2) << 0, 1).finished(),
                        std::make_shared<BoxIndicator>(Vec::Constant(1, -0.6),
                                                       Vec::Constant(1, 0.6))}};
  const MpcProblem mp = build_problem(spec);
  SolverConfig cfg;
  cfg.eps_tol = 1e-10;
  cfg.max_iter = 10000;
  const Solution sol = nama_solve(mp.problem, cfg, Vec::Zero(mp.problem.dual_dim()));
  REQUIRE(sol.converged());
  // unconstrained u0* = -2/3 < -0.6, so the box is active: u0 = -0.6
  CHECK(sol.x[1] == doctest::Approx(-0.6).epsilon(1e-6));
  CHECK(sol.x[2] == doctest::Approx(1.4).epsilon(1e-6));
}

TEST_CASE("afti16 scenario: dimensions, weights, conditioning") {
  const Afti16Scenario sc = afti16_scenario(std::string(AMA_DATA_DIR) + "/afti16.json");
  CHECK(sc.spec.nx == 4);
  CHECK(sc.spec.nu == 2);
  CHECK(sc.spec.N == 50);
  CHECK(sc.steps == 80);
  CHECK(sc.ref_switch_step == 40);
  CHECK((sc.spec.QN - 100.0 * sc.spec.Q[0]).cwiseAbs().maxCoeff() == 0.0);

  // dual dimension: inputs at stage 0, states+inputs at 1..N-1, states at N
  const MpcProblem mp = build_problem(sc.spec);
  const Index m = mp.problem.dual_dim();
  CHECK(m == 2 + 49 * 4 + 2);

  // effective first-order conditioning of the unscaled dual:
  // (||A||^2/mu_f) / lambda_min+ of the dual Hessian, quoted near 1e8
  const Mat Hd = oracle::dual_hessian_dense(mp.problem);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Hd + Hd.transpose()), Eigen::EigenvaluesOnly);
  const Vec ev = es.eigenvalues();
  double lmin = ama::kInf;
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > 1e-9 * ev.maxCoeff()) lmin = std::min(lmin, ev[i]);
  }
  const double nA = operator_norm(*mp.problem.A).inflated(1e-9);
  const double mu = mp.problem.f->strong_convexity();
  CHECK(mu == doctest::Approx(1e-4));
  const double cond = nA * nA / mu / lmin;
  CHECK(cond >= 1e7);
  CHECK(cond <= 1e9);

  // Jacobi scaling shrinks the exact spectral conditioning dramatically
  const ScaledProblem sp = scale_problem(mp.problem, jacobi_scaling(mp.problem));
  const Mat Hs = oracle::dual_hessian_dense(sp.problem);
  Eigen::SelfAdjointEigenSolver<Mat> es2(0.5 * (Hs + Hs.transpose()), Eigen::EigenvaluesOnly);
  const Vec ev2 = es2.eigenvalues();
  double lmin2 = ama::kInf;
  for (Index i = 0; i < ev2.size(); ++i) {
    if (ev2[i] > 1e-9 * ev2.maxCoeff()) lmin2 = std::min(lmin2, ev2[i]);
  }
  CHECK(ev2.maxCoeff() / lmin2 <= 100.0);
}

TEST_CASE("oscillating masses: dimensions and energy preservation") {
  const MpcSpec spec = oscillating_masses(8, 10);
  CHECK(spec.nx == 32);
  CHECK(spec.nu == 8);
  // undamped chain: the ZOH transition matrix preserves the spectrum on the
  // unit circle
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Mat>(spec.Phi[0]).eigenvalues();
  for (Index i = 0; i < ev.size(); ++i) {
    CHECK(std::abs(std::abs(ev[i]) - 1.0) <= 1e-8);
  }

  // terminal ellipsoid 1/2 x'Px <= delta fits inside the state box: the
  // extent of coordinate j over the ellipsoid is sqrt(2 delta (P^{-1})_jj)
  const auto* ball = dynamic_cast<const BallIndicator*>(spec.terminal_con[0].g.get());
  REQUIRE(ball);
  const Mat LN = spec.terminal_con[0].L;
  const Mat P = LN.transpose() * LN;
  const Mat Pinv = P.llt().solve(Mat::Identity(32, 32));
  const double delta = ball->radius() * ball->radius();  // r = sqrt(delta)
  double max_extent = 0.0;
  for (Index j = 0; j < 32; ++j) {
    max_extent = std::max(max_extent, std::sqrt(2.0 * delta * Pinv(j, j)));
  }
  CHECK(max_extent <= 4.0 + 1e-9);
  CHECK(max_extent >= 4.0 - 1e-6);  // delta is the largest such value

  // trivial instance: zero start, zero reference
  MpcSpec z = oscillating_masses(2, 5);
  const MpcProblem mp = build_problem(z);
  SolverConfig cfg;
  cfg.eps_tol = 1e-6;
  cfg.max_iter = 10;
  const Solution sol = nama_solve(mp.problem, cfg, Vec::Zero(mp.problem.dual_dim()));
  CHECK(sol.converged());
  CHECK(sol.iterations <= 2);
}

TEST_CASE("warm-start shift moves stage blocks back by one") {
  Rng rng(31);
  const MpcSpec spec = oracle::random_mpc_spec(rng, 2, 1, 5);
  const MpcProblem mp = build_problem(spec);
  Vec y = Vec::NullaryExpr(mp.problem.dual_dim(), [&](Index) { return rng.normal(); });
  const Vec s = shift_dual(mp, y);
  const auto& off = mp.stage_offsets;
  // interior stages: new stage 1 = old stage 2
  CHECK((s.segment(off[1], off[2] - off[1]) - y.segment(off[2], off[3] - off[2]))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  // stage 0 (inputs only) takes the tail of old stage 1
  CHECK(s[0] == y[off[2] - 1]);
  // vacated second-to-last stage is zero; terminal kept
  CHECK(s.segment(off[4], off[5] - off[4]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s.tail(2) - y.tail(2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("riccati factor rejects an indefinite innovation") {
  MpcSpec spec = scalar_spec(1);
  spec.R = {Mat::Identity(1, 1) * -0.5};
  CHECK_THROWS_AS(riccati_factor(spec), std::invalid_argument);
}
