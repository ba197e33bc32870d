#pragma once

#include <Eigen/Cholesky>

#include <memory>
#include <string>
#include <vector>

#include "ama/problem.hpp"

namespace ama {

/// One constraint entry on a stage: rows(L) penalized coordinates produced by
/// L acting on (x_i, u_i) (or x_N for terminal entries), with penalty g.
struct StageConstraint {
  Mat L;
  std::shared_ptr<const ProxOracle> g;
};

/// Finite-horizon, discrete-time linear-quadratic optimal control data:
///   min sum_i 1/2|x_i - xref|_Q^2 + 1/2|u_i - uref|_R^2 + terminal
///   s.t. x_{i+1} = Phi_i x_i + Gamma_i u_i + c_i,  x_0 = x_init,
/// plus per-stage penalized constraints g_i(L_i (x_i, u_i)).
/// Vectors of size 1 are shared across all stages (time-invariant case).
struct MpcSpec {
  int N = 0;
  Index nx = 0, nu = 0;
  std::vector<Mat> Phi;
  std::vector<Mat> Gamma;
  std::vector<Vec> c;  // empty = zero affine drift
  Vec x_init;
  std::vector<Mat> Q;
  std::vector<Mat> R;
  Mat QN;
  std::vector<Vec> x_ref;  // empty = origin; size 1 or N+1 (terminal last)
  std::vector<Vec> u_ref;  // empty = origin; size 1 or N
  std::vector<std::vector<StageConstraint>> stage_con;  // size N
  std::vector<StageConstraint> terminal_con;

  const Mat& Phi_at(int i) const { return Phi.size() == 1 ? Phi[0] : Phi[i]; }
  const Mat& Gamma_at(int i) const { return Gamma.size() == 1 ? Gamma[0] : Gamma[i]; }
  const Mat& Q_at(int i) const { return Q.size() == 1 ? Q[0] : Q[i]; }
  const Mat& R_at(int i) const { return R.size() == 1 ? R[0] : R[i]; }
  Vec c_at(int i) const;
  Vec x_ref_at(int i) const;  // valid for i = 0..N
  Vec u_ref_at(int i) const;

  Index traj_dim() const { return (N + 1) * nx + N * nu; }
  Index x_offset(int i) const { return i * (nx + nu); }
  Index u_offset(int i) const { return i * (nx + nu) + nx; }

  void validate() const;
};

/// Backward Riccati recursion output. Depends only on (Phi, Gamma, Q, R, QN,
/// N) so one factor serves every dual vector and every x_init.
struct RiccatiFactor {
  std::vector<Mat> P;                  // cost-to-go, P[N] = QN
  std::vector<Mat> K;                  // feedback gains
  std::vector<Eigen::LLT<Mat>> inno;   // R + Gamma' P Gamma factorizations
  std::vector<Mat> closed;             // Phi - Gamma K
};

/// Factor step. Throws std::invalid_argument when an innovation matrix
/// R + Gamma' P Gamma fails to be positive definite.
RiccatiFactor riccati_factor(const MpcSpec& spec);

/// x-step core: argmin of the stage costs plus <v, xbar> over the dynamics,
/// via one affine backward-forward sweep. v lives in trajectory space.
Vec riccati_solve_linear(const RiccatiFactor& factor, const MpcSpec& spec, const Vec& v);

/// x-step against a stacked dual vector y (applies the constraint adjoints
/// L_i' y_i and delegates to the sweep).
Vec riccati_solve(const RiccatiFactor& factor, const MpcSpec& spec, const Vec& y);

/// Smooth oracle backed by the Riccati sweep. value() is the quadratic stage
/// cost; the dynamics indicator is implicit (x-step outputs satisfy it).
class RiccatiOracle final : public SmoothOracle {
 public:
  using SmoothOracle::solve_linear;
  RiccatiOracle(MpcSpec spec, std::shared_ptr<const RiccatiFactor> factor = nullptr);

  Index dim() const override { return spec_.traj_dim(); }
  void solve_linear(const Vec& v, Vec& x) const override;
  double value(const Vec& xbar) const override;
  double strong_convexity() const override { return mu_; }
  bool affine() const override { return true; }

  const MpcSpec& spec() const { return spec_; }
  std::shared_ptr<const RiccatiFactor> factor() const { return factor_; }

 private:
  MpcSpec spec_;
  std::shared_ptr<const RiccatiFactor> factor_;
  double mu_ = 0.0;
};

struct MpcProblem {
  Problem problem;
  std::shared_ptr<const RiccatiFactor> factor;
  /// Dual row offset of each stage's constraint rows; size N+2, the last
  /// entry is the total dual dimension (terminal rows start at [N]).
  std::vector<Index> stage_offsets;
};

/// Assembles min f + g(A xbar): f = Riccati oracle, A = diag of the stacked
/// stage maps, g = block sum of the stage penalties. A prebuilt factor may be
/// shared across calls (closed-loop use).
MpcProblem build_problem(const MpcSpec& spec,
                         std::shared_ptr<const RiccatiFactor> factor = nullptr);

/// Warm start between consecutive MPC steps: constraint blocks shift back by
/// one stage where shapes match (stage 0 takes the matching tail of stage 1),
/// the vacated stage is zero, the terminal block is kept.
Vec shift_dual(const MpcProblem& layout, const Vec& y);

/// Exact zero-order-hold discretization via the augmented matrix exponential.
void zoh_discretize(const Mat& Ac, const Mat& Bc, double Ts, Mat& Phi, Mat& Gamma);

/// Discrete-time algebraic Riccati equation solved by value iteration.
Mat solve_dare(const Mat& Phi, const Mat& Gamma, const Mat& Q, const Mat& R,
               double tol = 1e-13, int max_iter = 200000);

/// AFTI-16 pitch-maneuver benchmark: 4 s closed loop at Ts = 0.05 (80 steps),
/// horizon 50, hard input boxes, soft constraints on attack and pitch angle,
/// reference pitch 10 deg for the first 2 s then 0. The discrete model and
/// constraint geometry come from a fixture file.
struct Afti16Scenario {
  MpcSpec spec;    // x_init = 0, references set per step via xref_for_step
  Mat Phi, Gamma;  // plant used for the closed-loop rollout
  int steps = 80;
  int ref_switch_step = 40;
  Vec ref_high, ref_low;

  Vec xref_for_step(int t) const { return t < ref_switch_step ? ref_high : ref_low; }
};

Afti16Scenario afti16_scenario(const std::string& fixture_path);

/// Chain of 2K unit masses coupled by unit springs between two walls, K
/// actuators each forcing one pair apart; exact ZOH at Ts = 0.5. States
/// (positions then velocities) and inputs are hard-boxed, the terminal set is
/// the largest LQR-cost ellipsoid inscribed in the state box.
MpcSpec oscillating_masses(int K, int N);

}  // namespace ama
