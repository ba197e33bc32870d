#include "ama/bench.hpp"

#include <algorithm>
#include <stdexcept>

#include "ama/rng.hpp"

namespace ama {

double BenchRun::avg(double ScenarioStats::*field) const {
  if (steps.empty()) return 0.0;
  double s = 0.0;
  for (const auto& st : steps) s += st.*field;
  return s / static_cast<double>(steps.size());
}

double BenchRun::avg_iterations() const {
  if (steps.empty()) return 0.0;
  long s = 0;
  for (const auto& st : steps) s += st.iterations;
  return static_cast<double>(s) / static_cast<double>(steps.size());
}

int BenchRun::max_iterations() const {
  int m = 0;
  for (const auto& st : steps) m = std::max(m, st.iterations);
  return m;
}

long BenchRun::total(long ScenarioStats::*field) const {
  long s = 0;
  for (const auto& st : steps) s += st.*field;
  return s;
}

namespace {

ScenarioStats stats_of(int index, const Solution& sol) {
  ScenarioStats st;
  st.index = index;
  st.iterations = sol.iterations;
  st.x_updates = sol.x_updates;
  st.z_updates = sol.z_updates;
  st.time_ms = sol.solve_ms;
  st.res_inf = sol.res_inf;
  st.converged = sol.converged();
  st.trace = sol.trace;
  return st;
}

}  // namespace

Afti16Result afti16_closed_loop(const Afti16Scenario& scenario, SolverKind kind,
                                const Afti16Options& options) {
  MpcSpec spec = scenario.spec;
  auto factor = std::make_shared<const RiccatiFactor>(riccati_factor(spec));

  // Scaling and stepsize depend on (A, Hessian) only, so they are computed
  // once on the template spec and reused at every closed-loop step.
  MpcProblem base = build_problem(spec, factor);
  Vec d_eff;
  std::shared_ptr<const ProxOracle> g_run = base.problem.g;
  std::shared_ptr<const LinearMap> A_run = base.problem.A;
  if (options.jacobi) {
    ScaledProblem sp = scale_problem(base.problem, jacobi_scaling(base.problem));
    d_eff = sp.d;
    g_run = sp.problem.g;
    A_run = sp.problem.A;
  }

  SolverConfig cfg = options.solver;
  if (!cfg.gamma0) {
    Problem probe{base.problem.f, g_run, A_run};
    cfg.gamma0 = resolve_gamma(probe, cfg);
  }

  Afti16Result result;
  result.run.kind = kind;
  Vec x_cur = spec.x_init;
  result.states.push_back(x_cur);
  Vec y_warm = Vec::Zero(A_run->rows());

  for (int t = 0; t < scenario.steps; ++t) {
    spec.x_init = x_cur;
    spec.x_ref = {scenario.xref_for_step(t)};
    auto oracle = std::make_shared<RiccatiOracle>(spec, factor);
    Problem problem{oracle, g_run, A_run};

    const Solution sol = solve(problem, cfg, kind, y_warm);
    result.run.steps.push_back(stats_of(t, sol));
    if (sol.status == SolveStatus::OracleError)
      throw std::runtime_error("afti16 closed loop: solver failure at step " +
                               std::to_string(t) + ": " + sol.trace.message);

    const Vec u0 = sol.x.segment(spec.u_offset(0), spec.nu);
    result.applied_inputs.push_back(u0);
    x_cur = scenario.Phi * x_cur + scenario.Gamma * u0;
    result.states.push_back(x_cur);

    if (options.warm_start) {
      if (options.jacobi) {
        // shift in the original dual variables, then map back
        const Vec y_orig = d_eff.cwiseProduct(sol.y);
        y_warm = shift_dual(base, y_orig).cwiseQuotient(d_eff);
      } else {
        y_warm = shift_dual(base, sol.y);
      }
    } else {
      y_warm.setZero();
    }
  }
  return result;
}

std::vector<Vec> masses_initial_states(const MpcSpec& spec, int count, std::uint64_t seed,
                                       const SolverConfig& config) {
  std::vector<Vec> out;
  Rng rng(seed);
  MpcSpec probe = spec;
  auto factor = std::make_shared<const RiccatiFactor>(riccati_factor(spec));

  SolverConfig cfg = config;
  cfg.max_iter = std::max(cfg.max_iter, 2000);

  const double box = 4.0;
  while (static_cast<int>(out.size()) < count) {
    Vec x(spec.nx);
    for (Index i = 0; i < spec.nx; ++i) x[i] = rng.uniform(-box, box);
    for (int shrink = 0; shrink < 40; ++shrink) {
      probe.x_init = x;
      MpcProblem mp = build_problem(probe, factor);
      const Solution sol = nama_solve(mp.problem, cfg, Vec::Zero(mp.problem.dual_dim()));
      bool feasible = sol.converged();
      if (feasible) {
        // hard-box check on the primal trajectory
        for (int i = 0; i <= probe.N && feasible; ++i) {
          const Vec xi = sol.x.segment(probe.x_offset(i), probe.nx);
          if (xi.cwiseAbs().maxCoeff() > box + 1e-3) feasible = false;
          if (i < probe.N) {
            const Vec ui = sol.x.segment(probe.u_offset(i), probe.nu);
            if (ui.cwiseAbs().maxCoeff() > 0.5 + 1e-3) feasible = false;
          }
        }
      }
      if (feasible) {
        out.push_back(x);
        break;
      }
      x *= 0.5;  // project toward the (feasible) origin
    }
  }
  return out;
}

BenchRun masses_bench(const MpcSpec& spec, const std::vector<Vec>& initial_states,
                      SolverKind kind, const SolverConfig& config) {
  BenchRun run;
  run.kind = kind;
  auto factor = std::make_shared<const RiccatiFactor>(riccati_factor(spec));
  MpcSpec step_spec = spec;

  SolverConfig cfg = config;
  if (!cfg.gamma0) {
    MpcProblem mp = build_problem(spec, factor);
    cfg.gamma0 = resolve_gamma(mp.problem, cfg);
  }

  for (std::size_t i = 0; i < initial_states.size(); ++i) {
    step_spec.x_init = initial_states[i];
    MpcProblem mp = build_problem(step_spec, factor);
    const Solution sol = solve(mp.problem, cfg, kind, Vec::Zero(mp.problem.dual_dim()));
    run.steps.push_back(stats_of(static_cast<int>(i), sol));
  }
  return run;
}

SolverKind solver_kind_from_string(const std::string& name) {
  if (name == "ama") return SolverKind::Ama;
  if (name == "fastama") return SolverKind::FastAma;
  if (name == "nama") return SolverKind::Nama;
  throw std::invalid_argument("unknown solver: " + name);
}

EngineKind engine_kind_from_string(const std::string& name) {
  if (name == "none" || name == "zero") return EngineKind::None;
  if (name == "lbfgs") return EngineKind::Lbfgs;
  if (name == "bfgs") return EngineKind::Bfgs;
  if (name == "broyden") return EngineKind::Broyden;
  throw std::invalid_argument("unknown direction engine: " + name);
}

}  // namespace ama
