#include "ama/mpc.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace ama {

namespace {

double lambda_min(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

Vec MpcSpec::c_at(int i) const {
  if (c.empty()) return Vec::Zero(nx);
  return c.size() == 1 ? c[0] : c[i];
}

Vec MpcSpec::x_ref_at(int i) const {
  if (x_ref.empty()) return Vec::Zero(nx);
  if (x_ref.size() == 1) return x_ref[0];
  return x_ref[i];
}

Vec MpcSpec::u_ref_at(int i) const {
  if (u_ref.empty()) return Vec::Zero(nu);
  return u_ref.size() == 1 ? u_ref[0] : u_ref[i];
}

void MpcSpec::validate() const {
  if (N < 0) throw std::invalid_argument("mpc: negative horizon");
  if (nx <= 0) throw std::invalid_argument("mpc: nx must be positive");
  if (N > 0 && nu <= 0) throw std::invalid_argument("mpc: nu must be positive");
  auto check_len = [](std::size_t len, int n, const char* what) {
    if (len != 1 && static_cast<int>(len) != n)
      throw std::invalid_argument(std::string("mpc: ") + what + " must have 1 or N entries");
  };
  if (N > 0) {
    if (Phi.empty() || Gamma.empty() || Q.empty() || R.empty())
      throw std::invalid_argument("mpc: missing dynamics or cost data");
    check_len(Phi.size(), N, "Phi");
    check_len(Gamma.size(), N, "Gamma");
    check_len(Q.size(), N, "Q");
    check_len(R.size(), N, "R");
    if (!c.empty()) check_len(c.size(), N, "c");
    if (!u_ref.empty()) check_len(u_ref.size(), N, "u_ref");
  }
  if (!x_ref.empty() && x_ref.size() != 1 && static_cast<int>(x_ref.size()) != N + 1)
    throw std::invalid_argument("mpc: x_ref must have 1 or N+1 entries");
  for (int i = 0; i < N; ++i) {
    if (Phi_at(i).rows() != nx || Phi_at(i).cols() != nx)
      throw std::invalid_argument("mpc: Phi dimension mismatch");
    if (Gamma_at(i).rows() != nx || Gamma_at(i).cols() != nu)
      throw std::invalid_argument("mpc: Gamma dimension mismatch");
    if (Q_at(i).rows() != nx || R_at(i).rows() != nu)
      throw std::invalid_argument("mpc: cost dimension mismatch");
    if (!(lambda_min(R_at(i)) > 0.0))
      throw std::invalid_argument("mpc: R must be positive definite");
  }
  if (QN.rows() != nx || QN.cols() != nx) throw std::invalid_argument("mpc: QN mismatch");
  if (x_init.size() != nx) throw std::invalid_argument("mpc: x_init mismatch");
  if (static_cast<int>(stage_con.size()) != N && !stage_con.empty())
    throw std::invalid_argument("mpc: stage_con must have N entries (or none)");
  for (int i = 0; i < static_cast<int>(stage_con.size()); ++i) {
    for (const auto& sc : stage_con[i]) {
      if (sc.L.cols() != nx + nu)
        throw std::invalid_argument("mpc: stage constraint map must act on (x, u)");
      if (!sc.g || sc.g->dim() != sc.L.rows())
        throw std::invalid_argument("mpc: stage penalty dimension mismatch");
    }
  }
  for (const auto& sc : terminal_con) {
    if (sc.L.cols() != nx)
      throw std::invalid_argument("mpc: terminal constraint map must act on x_N");
    if (!sc.g || sc.g->dim() != sc.L.rows())
      throw std::invalid_argument("mpc: terminal penalty dimension mismatch");
  }
}

RiccatiFactor riccati_factor(const MpcSpec& spec) {
  spec.validate();
  RiccatiFactor f;
  f.P.resize(spec.N + 1);
  f.K.resize(spec.N);
  f.inno.resize(spec.N);
  f.closed.resize(spec.N);
  f.P[spec.N] = 0.5 * (spec.QN + spec.QN.transpose());
  for (int i = spec.N - 1; i >= 0; --i) {
    const Mat& Phi = spec.Phi_at(i);
    const Mat& Gam = spec.Gamma_at(i);
    const Mat PG = f.P[i + 1] * Gam;
    Mat M = spec.R_at(i) + Gam.transpose() * PG;
    M = 0.5 * (M + M.transpose());
    f.inno[i].compute(M);
    if (f.inno[i].info() != Eigen::Success || !(lambda_min(M) > 0.0)) {
      throw std::invalid_argument("riccati_factor: innovation matrix at stage " +
                                  std::to_string(i) + " is not positive definite");
    }
    f.K[i] = f.inno[i].solve(PG.transpose() * Phi);
    f.closed[i] = Phi - Gam * f.K[i];
    Mat P = spec.Q_at(i) + Phi.transpose() * f.P[i + 1] * f.closed[i];
    f.P[i] = 0.5 * (P + P.transpose());
  }
  return f;
}

Vec riccati_solve_linear(const RiccatiFactor& factor, const MpcSpec& spec, const Vec& v) {
  if (v.size() != spec.traj_dim())
    throw std::invalid_argument("riccati_solve_linear: dimension mismatch");
  const int N = spec.N;

  // Backward affine pass: value-function linear terms p_i and input offsets.
  std::vector<Vec> k_aff(N);
  Vec p = spec.QN * (-spec.x_ref_at(N)) + v.segment(spec.x_offset(N), spec.nx);
  for (int i = N - 1; i >= 0; --i) {
    const Vec qx = spec.Q_at(i) * (-spec.x_ref_at(i)) + v.segment(spec.x_offset(i), spec.nx);
    const Vec ru = spec.R_at(i) * (-spec.u_ref_at(i)) + v.segment(spec.u_offset(i), spec.nu);
    const Vec s = p + factor.P[i + 1] * spec.c_at(i);
    const Vec gs = spec.Gamma_at(i).transpose() * s + ru;
    k_aff[i] = factor.inno[i].solve(gs);
    p = qx + spec.Phi_at(i).transpose() * s - factor.K[i].transpose() * gs;
  }

  // Forward rollout.
  Vec traj(spec.traj_dim());
  Vec x = spec.x_init;
  for (int i = 0; i < N; ++i) {
    traj.segment(spec.x_offset(i), spec.nx) = x;
    const Vec u = -(factor.K[i] * x) - k_aff[i];
    traj.segment(spec.u_offset(i), spec.nu) = u;
    x = spec.Phi_at(i) * x + spec.Gamma_at(i) * u + spec.c_at(i);
  }
  traj.segment(spec.x_offset(N), spec.nx) = x;
  return traj;
}

Vec riccati_solve(const RiccatiFactor& factor, const MpcSpec& spec, const Vec& y) {
  Vec v = Vec::Zero(spec.traj_dim());
  Index row = 0;
  for (int i = 0; i < spec.N; ++i) {
    if (static_cast<int>(spec.stage_con.size()) <= i) break;
    for (const auto& sc : spec.stage_con[i]) {
      v.segment(spec.x_offset(i), spec.nx + spec.nu).noalias() +=
          sc.L.transpose() * y.segment(row, sc.L.rows());
      row += sc.L.rows();
    }
  }
  for (const auto& sc : spec.terminal_con) {
    v.segment(spec.x_offset(spec.N), spec.nx).noalias() +=
        sc.L.transpose() * y.segment(row, sc.L.rows());
    row += sc.L.rows();
  }
  if (row != y.size()) throw std::invalid_argument("riccati_solve: dual dimension mismatch");
  return riccati_solve_linear(factor, spec, v);
}

RiccatiOracle::RiccatiOracle(MpcSpec spec, std::shared_ptr<const RiccatiFactor> factor)
    : spec_(std::move(spec)), factor_(std::move(factor)) {
  spec_.validate();
  if (!factor_) factor_ = std::make_shared<RiccatiFactor>(riccati_factor(spec_));
  double mu = lambda_min(spec_.QN);
  for (int i = 0; i < spec_.N; ++i) {
    mu = std::min(mu, lambda_min(spec_.Q_at(i)));
    mu = std::min(mu, lambda_min(spec_.R_at(i)));
  }
  mu_ = std::max(mu, 0.0);  // 0 = strong convexity only on the dynamics subspace
}

void RiccatiOracle::solve_linear(const Vec& v, Vec& x) const {
  x = riccati_solve_linear(*factor_, spec_, v);
}

double RiccatiOracle::value(const Vec& xbar) const {
  double s = 0.0;
  for (int i = 0; i < spec_.N; ++i) {
    const Vec dx = xbar.segment(spec_.x_offset(i), spec_.nx) - spec_.x_ref_at(i);
    const Vec du = xbar.segment(spec_.u_offset(i), spec_.nu) - spec_.u_ref_at(i);
    s += 0.5 * dx.dot(spec_.Q_at(i) * dx) + 0.5 * du.dot(spec_.R_at(i) * du);
  }
  const Vec dx = xbar.segment(spec_.x_offset(spec_.N), spec_.nx) - spec_.x_ref_at(spec_.N);
  return s + 0.5 * dx.dot(spec_.QN * dx);
}

MpcProblem build_problem(const MpcSpec& spec, std::shared_ptr<const RiccatiFactor> factor) {
  spec.validate();
  MpcProblem out;

  std::vector<Mat> blocks;
  std::vector<BlockSum::Block> gblocks;
  out.stage_offsets.assign(spec.N + 2, 0);
  Index row = 0;
  for (int i = 0; i < spec.N; ++i) {
    out.stage_offsets[i] = row;
    Index stage_rows = 0;
    const auto& cons = spec.stage_con.empty() ? std::vector<StageConstraint>{} : spec.stage_con[i];
    for (const auto& sc : cons) stage_rows += sc.L.rows();
    Mat B(stage_rows, spec.nx + spec.nu);
    Index r = 0;
    for (const auto& sc : cons) {
      B.middleRows(r, sc.L.rows()) = sc.L;
      gblocks.push_back({row + r, sc.g});
      r += sc.L.rows();
    }
    blocks.push_back(std::move(B));
    row += stage_rows;
  }
  out.stage_offsets[spec.N] = row;
  Index term_rows = 0;
  for (const auto& sc : spec.terminal_con) term_rows += sc.L.rows();
  Mat BT(term_rows, spec.nx);
  Index r = 0;
  for (const auto& sc : spec.terminal_con) {
    BT.middleRows(r, sc.L.rows()) = sc.L;
    gblocks.push_back({row + r, sc.g});
    r += sc.L.rows();
  }
  blocks.push_back(std::move(BT));
  row += term_rows;
  out.stage_offsets[spec.N + 1] = row;
  if (row == 0) throw std::invalid_argument("build_problem: no constraints, nothing to split");

  auto oracle = std::make_shared<RiccatiOracle>(spec, std::move(factor));
  out.factor = oracle->factor();
  out.problem.f = oracle;
  out.problem.g = std::make_shared<BlockSum>(std::move(gblocks));
  out.problem.A = std::make_shared<BlockDiagMap>(std::move(blocks));
  out.problem.validate();
  return out;
}

Vec shift_dual(const MpcProblem& layout, const Vec& y) {
  const auto& off = layout.stage_offsets;
  const int N = static_cast<int>(off.size()) - 2;
  Vec out = Vec::Zero(y.size());
  for (int i = 0; i + 1 < N; ++i) {
    const Index rows_i = off[i + 1] - off[i];
    const Index rows_n = off[i + 2] - off[i + 1];
    if (rows_i == rows_n) {
      out.segment(off[i], rows_i) = y.segment(off[i + 1], rows_n);
    } else if (rows_i < rows_n) {
      // e.g. input-only stage 0 takes the matching tail of stage 1
      out.segment(off[i], rows_i) = y.segment(off[i + 2] - rows_i, rows_i);
    }
  }
  out.segment(off[N], off[N + 1] - off[N]) = y.segment(off[N], off[N + 1] - off[N]);
  return out;
}

void zoh_discretize(const Mat& Ac, const Mat& Bc, double Ts, Mat& Phi, Mat& Gamma) {
  const Index nx = Ac.rows(), nu = Bc.cols();
  Mat M = Mat::Zero(nx + nu, nx + nu);
  M.topLeftCorner(nx, nx) = Ac;
  M.topRightCorner(nx, nu) = Bc;
  const Mat E = (M * Ts).exp();
  Phi = E.topLeftCorner(nx, nx);
  Gamma = E.topRightCorner(nx, nu);
}

Mat solve_dare(const Mat& Phi, const Mat& Gamma, const Mat& Q, const Mat& R, double tol,
               int max_iter) {
  Mat P = Q;
  for (int it = 0; it < max_iter; ++it) {
    const Mat PG = P * Gamma;
    Mat M = R + Gamma.transpose() * PG;
    const Mat K = M.ldlt().solve(PG.transpose() * Phi);
    Mat Pn = Q + Phi.transpose() * P * (Phi - Gamma * K);
    Pn = 0.5 * (Pn + Pn.transpose());
    const double diff = (Pn - P).cwiseAbs().maxCoeff();
    P = std::move(Pn);
    if (diff <= tol * std::max(1.0, P.cwiseAbs().maxCoeff())) return P;
  }
  throw std::runtime_error("solve_dare: value iteration did not converge");
}

// ------------------------------------------------------------- benchmarks

Afti16Scenario afti16_scenario(const std::string& fixture_path) {
  std::ifstream in(fixture_path);
  if (!in) throw std::runtime_error("afti16_scenario: cannot open model fixture " + fixture_path);
  nlohmann::json j;
  in >> j;

  auto mat_of = [](const nlohmann::json& rows) {
    Mat M(rows.size(), rows[0].size());
    for (Index i = 0; i < M.rows(); ++i)
      for (Index k = 0; k < M.cols(); ++k) M(i, k) = rows[i][k].get<double>();
    return M;
  };
  auto vec_of = [](const nlohmann::json& arr) {
    Vec v(arr.size());
    for (Index i = 0; i < v.size(); ++i) v[i] = arr[i].get<double>();
    return v;
  };

  Afti16Scenario sc;
  sc.Phi = mat_of(j.at("Phi"));
  sc.Gamma = mat_of(j.at("Gamma"));
  const double Ts = j.at("Ts").get<double>();
  const Index nx = sc.Phi.rows(), nu = sc.Gamma.cols();

  const Mat Cx = mat_of(j.at("state_rows"));
  const Vec x_lo = vec_of(j.at("state_lo"));
  const Vec x_hi = vec_of(j.at("state_hi"));
  const double ubox = j.at("input_box").get<double>();

  MpcSpec spec;
  spec.N = 50;
  spec.nx = nx;
  spec.nu = nu;
  spec.Phi = {sc.Phi};
  spec.Gamma = {sc.Gamma};
  Vec qdiag(4);
  qdiag << 1e-4, 1e2, 1e-3, 1e2;
  spec.Q = {Mat(qdiag.asDiagonal())};
  spec.QN = 100.0 * spec.Q[0];
  spec.R = {Mat(Vec::Constant(nu, 1e-2).asDiagonal())};
  spec.x_init = Vec::Zero(nx);

  const double soft_weight = 1e6;
  const Vec alpha = Vec::Constant(Cx.rows(), soft_weight);
  auto soft = std::make_shared<SoftBox>(x_lo, x_hi, alpha);
  auto hard = std::make_shared<BoxIndicator>(Vec::Constant(nu, -ubox), Vec::Constant(nu, ubox));

  Mat Lx(Cx.rows(), nx + nu);
  Lx << Cx, Mat::Zero(Cx.rows(), nu);
  Mat Lu(nu, nx + nu);
  Lu << Mat::Zero(nu, nx), Mat::Identity(nu, nu);

  spec.stage_con.resize(spec.N);
  spec.stage_con[0] = {{Lu, hard}};  // x_0 is fixed: constraining it would add
                                     // zero-curvature dual rows
  for (int i = 1; i < spec.N; ++i) spec.stage_con[i] = {{Lx, soft}, {Lu, hard}};
  spec.terminal_con = {{Cx, soft}};

  sc.steps = static_cast<int>(std::lround(4.0 / Ts));
  sc.ref_switch_step = static_cast<int>(std::lround(2.0 / Ts));
  sc.ref_high = Vec::Zero(nx);
  sc.ref_high[3] = 10.0;
  sc.ref_low = Vec::Zero(nx);
  spec.x_ref = {sc.ref_high};
  spec.validate();
  sc.spec = std::move(spec);
  return sc;
}

MpcSpec oscillating_masses(int K, int N) {
  if (K < 1) throw std::invalid_argument("oscillating_masses: K must be >= 1");
  const Index nm = 2 * K;   // number of masses
  const Index nx = 4 * K;   // positions then velocities
  const Index nu = K;

  // Spring chain with walls: acceleration = T p + F u, T = tridiag(1,-2,1).
  Mat T = Mat::Zero(nm, nm);
  for (Index i = 0; i < nm; ++i) {
    T(i, i) = -2.0;
    if (i > 0) T(i, i - 1) = 1.0;
    if (i + 1 < nm) T(i, i + 1) = 1.0;
  }
  Mat F = Mat::Zero(nm, nu);
  for (Index j = 0; j < nu; ++j) {
    F(2 * j, j) = 1.0;
    F(2 * j + 1, j) = -1.0;
  }
  Mat Ac = Mat::Zero(nx, nx);
  Ac.topRightCorner(nm, nm) = Mat::Identity(nm, nm);
  Ac.bottomLeftCorner(nm, nm) = T;
  Mat Bc = Mat::Zero(nx, nu);
  Bc.bottomRows(nm) = F;

  MpcSpec spec;
  spec.N = N;
  spec.nx = nx;
  spec.nu = nu;
  Mat Phi, Gamma;
  zoh_discretize(Ac, Bc, 0.5, Phi, Gamma);
  spec.Phi = {Phi};
  spec.Gamma = {Gamma};
  spec.Q = {Mat::Identity(nx, nx)};
  spec.QN = Mat::Identity(nx, nx);
  spec.R = {Mat::Identity(nu, nu)};
  spec.x_init = Vec::Zero(nx);

  const double xbox = 4.0, ubox = 0.5;
  auto xhard = std::make_shared<BoxIndicator>(Vec::Constant(nx, -xbox), Vec::Constant(nx, xbox));
  auto uhard = std::make_shared<BoxIndicator>(Vec::Constant(nu, -ubox), Vec::Constant(nu, ubox));
  Mat Lx(nx, nx + nu);
  Lx << Mat::Identity(nx, nx), Mat::Zero(nx, nu);
  Mat Lu(nu, nx + nu);
  Lu << Mat::Zero(nu, nx), Mat::Identity(nu, nu);
  spec.stage_con.resize(N);
  spec.stage_con[0] = {{Lu, uhard}};
  for (int i = 1; i < N; ++i) spec.stage_con[i] = {{Lx, xhard}, {Lu, uhard}};

  // Terminal ellipsoid 1/2 x'Px <= delta with P from the LQR Riccati
  // equation; delta is the largest value keeping the ellipsoid inside the
  // state box, via the axis extents sqrt(2 delta (P^{-1})_jj).
  const Mat P = solve_dare(Phi, Gamma, spec.Q[0], spec.R[0]);
  Eigen::LLT<Mat> llt(P);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("oscillating_masses: terminal cost not positive definite");
  const Mat Pinv = llt.solve(Mat::Identity(nx, nx));
  double delta = kInf;
  for (Index jj = 0; jj < nx; ++jj) delta = std::min(delta, xbox * xbox / (2.0 * Pinv(jj, jj)));
  const Mat LN = Mat(llt.matrixL()).transpose();  // L_N' L_N = P
  spec.terminal_con = {{LN, std::make_shared<BallIndicator>(nx, std::sqrt(delta))}};

  spec.validate();
  return spec;
}

}  // namespace ama
