#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ama/mpc.hpp"
#include "ama/solver.hpp"

namespace ama {

/// One benchmark scenario outcome (an MPC step, or one initial state).
struct ScenarioStats {
  int index = 0;
  int iterations = 0;
  long x_updates = 0;
  long z_updates = 0;
  double time_ms = 0.0;
  double res_inf = 0.0;
  bool converged = false;
  SolveTrace trace;
};

struct BenchRun {
  SolverKind kind = SolverKind::Nama;
  std::vector<ScenarioStats> steps;

  double avg(double ScenarioStats::*field) const;
  double avg_iterations() const;
  int max_iterations() const;
  long total(long ScenarioStats::*field) const;
};

struct Afti16Options {
  SolverConfig solver;
  bool jacobi = true;
  bool warm_start = true;
};

struct Afti16Result {
  BenchRun run;
  std::vector<Vec> applied_inputs;  // u_0 per step
  std::vector<Vec> states;          // closed-loop states, size steps+1
};

/// Closed-loop AFTI-16 rollout with one solver. The Riccati factor, Jacobi
/// scaling and stepsize are computed once and reused across all steps.
Afti16Result afti16_closed_loop(const Afti16Scenario& scenario, SolverKind kind,
                                const Afti16Options& options);

/// Seeded feasible-initial-state sampler for the oscillating-masses suite:
/// draw x uniformly in the state box, accept when a feasible trajectory
/// exists (the MPC solve converges and its trajectory respects the hard
/// constraints), otherwise shrink the draw toward the origin and retry.
std::vector<Vec> masses_initial_states(const MpcSpec& spec, int count, std::uint64_t seed,
                                       const SolverConfig& config);

/// Solves the masses problem once per initial state (cold start).
BenchRun masses_bench(const MpcSpec& spec, const std::vector<Vec>& initial_states,
                      SolverKind kind, const SolverConfig& config);

SolverKind solver_kind_from_string(const std::string& name);
EngineKind engine_kind_from_string(const std::string& name);

}  // namespace ama
