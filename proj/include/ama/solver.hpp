#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ama/directions.hpp"
#include "ama/envelope.hpp"
#include "ama/problem.hpp"

namespace ama {

enum class SolverKind { Ama, FastAma, Nama };

struct SolverConfig {
  /// Initial stepsize; empty means automatic: 0.95 over the tight dual
  /// Lipschitz constant for affine oracles (never above 0.95 mu_f/||A||^2
  /// territory in validity: any gamma < 1/L_dual keeps every envelope
  /// property used by the solver). With mu_f unknown and no gamma given,
  /// gamma starts at 1 and backtracking is forced on.
  std::optional<double> gamma0;
  double beta = 0.5;     // line-search backtracking factor, in (0,1)
  double tau_min = 1e-3; // smallest line-search stepsize before AMA fallback
  double eps_tol = 1e-4; // termination on ||R_gamma(y)||_inf
  int max_iter = 10000;
  double alpha = 0.5;    // gamma-backtracking sufficient-decrease parameter
  EngineKind engine = EngineKind::Lbfgs;
  int memory = 20;
  bool gamma_backtracking = false;

  void validate() const;
};

enum class SolveStatus { Converged, MaxIter, OracleError };

struct IterRecord {
  int k = 0;
  double gamma = 0.0;
  double tau = 0.0;      // 0 marks an AMA fallback step
  int backtracks = 0;    // line-search trial halvings i_k
  double res_inf = 0.0;  // ||R_gamma(y^k)||_inf
  double ame = 0.0;      // psi_gamma(y^k)
  long x_updates = 0;    // x-steps executed during this iteration
  long z_updates = 0;
  double time_ms = 0.0;
};

struct SolveTrace {
  std::vector<IterRecord> rows;
  SolveStatus status = SolveStatus::MaxIter;
  std::string message;
  int gamma_halvings = 0;
};

struct Solution {
  Vec y, x, z;
  double res_inf = 0.0;
  SolveStatus status = SolveStatus::MaxIter;
  int iterations = 0;
  long x_updates = 0;
  long z_updates = 0;
  double solve_ms = 0.0;
  double gamma_final = 0.0;
  SolveTrace trace;

  bool converged() const { return status == SolveStatus::Converged; }
};

/// Per-iteration view handed to an observer (test instrumentation): the
/// cache at y^k, the accepted line-search point when one exists, and the
/// cache at y^{k+1}.
struct IterationView {
  const IterateCache* current = nullptr;
  const IterateCache* tilde = nullptr;  // null on fallback/plain AMA steps
  const IterateCache* next = nullptr;
  double tau = 0.0;
  const DirectionEngine* engine = nullptr;
};
using Observer = std::function<void(int k, const IterationView&)>;

/// Resolves the stepsize the solver will start from (the "auto" policy above).
double resolve_gamma(const Problem& problem, const SolverConfig& config);

struct LineSearchResult {
  bool accepted = false;
  double tau = 0.0;
  int trials = 0;  // halvings performed (i_k)
  IterateCache tilde;
  long x_evals = 0;
  long z_evals = 0;
};

/// Backtracking search over tau in {1, beta, beta^2, ...} down to tau_min for
/// the trial point y_trial = y + tau d + gamma (1 - tau)(Ax - z), accepting
/// when psi_gamma does not increase. Each trial costs one z-step; x-steps are
/// shared across trials through the affine structure of the x-oracle when
/// available. d = 0 short-circuits to tau = 1 with the current cache.
LineSearchResult line_search(const Problem& problem, const IterateCache& cache, const Vec& d,
                             double gamma, double beta, double tau_min);

Solution solve(const Problem& problem, const SolverConfig& config, SolverKind kind, const Vec& y0,
               const Observer& observer = {});

inline Solution ama_solve(const Problem& p, const SolverConfig& c, const Vec& y0,
                          const Observer& o = {}) {
  return solve(p, c, SolverKind::Ama, y0, o);
}
inline Solution fast_ama_solve(const Problem& p, const SolverConfig& c, const Vec& y0,
                               const Observer& o = {}) {
  return solve(p, c, SolverKind::FastAma, y0, o);
}
inline Solution nama_solve(const Problem& p, const SolverConfig& c, const Vec& y0,
                           const Observer& o = {}) {
  return solve(p, c, SolverKind::Nama, y0, o);
}

const char* to_string(SolveStatus status);
const char* to_string(SolverKind kind);

}  // namespace ama
