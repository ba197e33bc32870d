#include "ama/solver.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace ama {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

constexpr double kGammaUnderflow = 1e-16;

/// Sufficient-decrease test from the gamma-backtracking rule:
/// f(x_a) > f(x_b) - <y_b, A(x_a - x_b)> + (alpha gamma / 2) ||Ax_a - z_a||^2
/// signals that gamma overshoots the curvature and must be halved.
bool gamma_test_fails(const Problem& problem, const Vec& Ax_a, const Vec& r_a, double f_a,
                      const Vec& y_b, const Vec& x_b, double alpha, double gamma) {
  const double f_b = problem.f->value(x_b);
  const Vec Ax_b = problem.A->apply(x_b);
  const double rhs =
      f_b - y_b.dot(Ax_a - Ax_b) + 0.5 * alpha * gamma * r_a.squaredNorm();
  return f_a > rhs + 1e-12 * (1.0 + std::abs(rhs));
}

struct Counters {
  long xu = 0, zu = 0;
};

IterateCache eval_cache(const Problem& problem, const Vec& y, double gamma, Counters& c) {
  ++c.xu;
  ++c.zu;
  return ame_eval(problem, y, gamma);
}

}  // namespace

void SolverConfig::validate() const {
  if (gamma0 && !(*gamma0 > 0.0)) throw std::invalid_argument("config: gamma0 must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("config: beta must be in (0,1)");
  if (!(tau_min > 0.0 && tau_min <= 1.0))
    throw std::invalid_argument("config: tau_min must be in (0,1]");
  if (!(eps_tol > 0.0)) throw std::invalid_argument("config: eps_tol must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("config: alpha must be in (0,1)");
  if (max_iter < 0) throw std::invalid_argument("config: max_iter must be nonnegative");
  if (memory < 1) throw std::invalid_argument("config: memory must be >= 1");
}

double resolve_gamma(const Problem& problem, const SolverConfig& config) {
  if (config.gamma0) return *config.gamma0;
  if (problem.f->affine()) {
    const OpNormEstimate L = dual_lipschitz(problem);
    if (L.value > 0.0) return 0.95 / L.inflated(1e-9);
    return 1.0;  // flat dual: any stepsize works
  }
  const double mu = problem.f->strong_convexity();
  if (mu > 0.0) {
    const OpNormEstimate nu = operator_norm(*problem.A);
    const double n2 = nu.inflated(1e-9);
    if (n2 > 0.0) return 0.95 * mu / (n2 * n2);
  }
  return 1.0;  // unknown curvature: caller forces gamma backtracking
}

LineSearchResult line_search(const Problem& problem, const IterateCache& cache, const Vec& d,
                             double gamma, double beta, double tau_min) {
  LineSearchResult res;
  if (d.isZero(0.0)) {
    // Zero direction: tau = 1 gives the trial point y itself, so the current
    // cache already is the accepted point and the step reduces to plain AMA.
    res.accepted = true;
    res.tau = 1.0;
    res.tilde = cache;
    return res;
  }

  const double psi = cache.ame;
  const double accept_tol = 1e-12 * (1.0 + std::abs(psi));
  const bool affine = problem.f->affine();

  const Vec x_tau1 = eval_x(problem, cache.y + d);
  ++res.x_evals;
  Vec x_tau0;
  bool have_x0 = false;

  double tau = 1.0;
  int trials = 0;
  while (tau >= tau_min) {
    IterateCache t;
    t.gamma = gamma;
    t.y = cache.y + tau * d + gamma * (1.0 - tau) * cache.r;
    if (tau == 1.0) {
      t.x = x_tau1;
    } else if (affine) {
      if (!have_x0) {
        x_tau0 = eval_x(problem, t_gamma(cache));
        have_x0 = true;
        ++res.x_evals;
      }
      t.x = tau * x_tau1 + (1.0 - tau) * x_tau0;
    } else {
      t.x = eval_x(problem, t.y);
      ++res.x_evals;
    }
    t.Ax = problem.A->apply(t.x);
    t.z = problem.g->prox(t.y / gamma + t.Ax, 1.0 / gamma);
    ++res.z_evals;
    t.r = t.Ax - t.z;
    t.f_val = problem.f->value(t.x);
    t.g_val = problem.g->value(t.z);
    t.ame = -(t.f_val + t.g_val + t.y.dot(t.r) + 0.5 * gamma * t.r.squaredNorm());

    if (std::isfinite(t.ame) && t.ame <= psi + accept_tol) {
      res.accepted = true;
      res.tau = tau;
      res.trials = trials;
      res.tilde = std::move(t);
      return res;
    }
    tau *= beta;
    ++trials;
  }
  res.trials = trials;
  return res;
}

namespace {

struct LoopShared {
  const Problem& problem;
  const SolverConfig& config;
  double gamma;
  bool backtrack_on;
  SolveTrace trace;
  long xu_total = 0, zu_total = 0;

  void halve_gamma() {
    gamma *= 0.5;
    ++trace.gamma_halvings;
    if (gamma < kGammaUnderflow) {
      throw std::runtime_error(
          "gamma underflow below 1e-16 during backtracking; "
          "f appears not strongly convex along the iterates");
    }
  }

  void record(int k, double tau, int backtracks, const IterateCache& cache, Counters c,
              Clock::time_point t0) {
    IterRecord row;
    row.k = k;
    row.gamma = gamma;
    row.tau = tau;
    row.backtracks = backtracks;
    row.res_inf = cache.res_inf();
    row.ame = cache.ame;
    row.x_updates = c.xu;
    row.z_updates = c.zu;
    row.time_ms = ms_since(t0);
    trace.rows.push_back(row);
    xu_total += c.xu;
    zu_total += c.zu;
  }
};

Solution finish(LoopShared& s, const IterateCache& cache, SolveStatus status,
                Clock::time_point t0, std::string message = {}) {
  Solution sol;
  sol.y = cache.y;
  sol.x = cache.x;
  sol.z = cache.z;
  sol.res_inf = cache.res_inf();
  sol.status = status;
  sol.iterations = static_cast<int>(s.trace.rows.size());
  sol.x_updates = s.xu_total;
  sol.z_updates = s.zu_total;
  sol.solve_ms = ms_since(t0);
  sol.gamma_final = s.gamma;
  s.trace.status = status;
  s.trace.message = std::move(message);
  sol.trace = std::move(s.trace);
  return sol;
}

/// First backtracking test, evaluated at the current cache: probes
/// x(T_gamma(y)) and halves gamma until the quadratic upper bound holds.
/// Returns the possibly recomputed cache.
IterateCache gamma_guard(LoopShared& s, IterateCache cache, DirectionEngine* engine,
                         Counters& c) {
  if (!s.backtrack_on) {
    if (!std::isfinite(cache.ame)) {
      throw std::runtime_error("non-finite envelope value; enable gamma backtracking "
                               "or reduce gamma");
    }
    return cache;
  }
  for (;;) {
    bool bad = !std::isfinite(cache.ame);
    if (!bad) {
      const Vec ybar = t_gamma(cache);
      const Vec xbar = eval_x(s.problem, ybar);
      ++c.xu;
      bad = gamma_test_fails(s.problem, cache.Ax, cache.r, cache.f_val, ybar, xbar,
                             s.config.alpha, s.gamma);
    }
    if (!bad) return cache;
    s.halve_gamma();
    if (engine) engine->reset();
    cache = eval_cache(s.problem, cache.y, s.gamma, c);
  }
}

Solution run_ama(LoopShared& s, const Vec& y0, const Observer& observer) {
  const auto t0 = Clock::now();
  Counters c0;
  IterateCache cache = eval_cache(s.problem, y0, s.gamma, c0);
  for (int k = 0; k < s.config.max_iter; ++k) {
    const auto it0 = Clock::now();
    Counters c = std::exchange(c0, Counters{});
    cache = gamma_guard(s, std::move(cache), nullptr, c);
    if (observer) {
      IterationView view;
      view.current = &cache;
      observer(k, view);
    }
    if (cache.res_inf() <= s.config.eps_tol) {
      s.record(k, 1.0, 0, cache, c, it0);
      return finish(s, cache, SolveStatus::Converged, t0);
    }
    const Vec ynext = t_gamma(cache);
    IterateCache next = eval_cache(s.problem, ynext, s.gamma, c);
    s.record(k, 1.0, 0, cache, c, it0);
    cache = std::move(next);
  }
  return finish(s, cache, SolveStatus::MaxIter, t0);
}

Solution run_fast_ama(LoopShared& s, const Vec& y0, const Observer& observer) {
  const auto t0 = Clock::now();
  Vec y_prev = y0;
  Vec w = y0;
  double t_prev = 1.0;
  Counters c0;
  IterateCache cache = eval_cache(s.problem, w, s.gamma, c0);
  for (int k = 0; k < s.config.max_iter; ++k) {
    const auto it0 = Clock::now();
    Counters c = std::exchange(c0, Counters{});
    const double gamma_before = s.gamma;
    cache = gamma_guard(s, std::move(cache), nullptr, c);
    if (s.gamma != gamma_before) {
      // restart momentum after a stepsize change
      t_prev = 1.0;
      y_prev = cache.y;
    }
    if (observer) {
      IterationView view;
      view.current = &cache;
      observer(k, view);
    }
    if (cache.res_inf() <= s.config.eps_tol) {
      s.record(k, 1.0, 0, cache, c, it0);
      return finish(s, cache, SolveStatus::Converged, t0);
    }
    const Vec ynext = t_gamma(cache);
    const double t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
    const Vec wnext = ynext + ((t_prev - 1.0) / t) * (ynext - y_prev);
    y_prev = ynext;
    t_prev = t;
    IterateCache next = eval_cache(s.problem, wnext, s.gamma, c);
    s.record(k, 1.0, 0, cache, c, it0);
    cache = std::move(next);
  }
  return finish(s, cache, SolveStatus::MaxIter, t0);
}

Solution run_nama(LoopShared& s, const Vec& y0, const Observer& observer) {
  const auto t0 = Clock::now();
  auto engine = make_engine(s.config.engine, s.problem.dual_dim(), s.config.memory);

  Counters c0;
  IterateCache cache = eval_cache(s.problem, y0, s.gamma, c0);
  for (int k = 0; k < s.config.max_iter; ++k) {
    const auto it0 = Clock::now();
    Counters c = std::exchange(c0, Counters{});
    for (;;) {  // restarted when a backtracking test halves gamma
      cache = gamma_guard(s, std::move(cache), engine.get(), c);
      if (cache.res_inf() <= s.config.eps_tol) {
        if (observer) {
          IterationView view;
          view.current = &cache;
          view.engine = engine.get();
          observer(k, view);
        }
        s.record(k, 1.0, 0, cache, c, it0);
        return finish(s, cache, SolveStatus::Converged, t0);
      }

      const Vec d = engine->propose(cache.r);
      LineSearchResult ls =
          line_search(s.problem, cache, d, s.gamma, s.config.beta, s.config.tau_min);
      c.xu += ls.x_evals;
      c.zu += ls.z_evals;

      Vec ynext;
      double tau_rec;
      if (ls.accepted) {
        ynext = t_gamma(ls.tilde);
        tau_rec = ls.tau;
        SecantPair pair{ls.tilde.y - cache.y, cache.r - ls.tilde.r};
        engine->push(pair);
      } else {
        ynext = t_gamma(cache);  // tau fell below tau_min: plain AMA update
        tau_rec = 0.0;
      }
      IterateCache next = eval_cache(s.problem, ynext, s.gamma, c);

      if (s.backtrack_on && ls.accepted &&
          (!std::isfinite(next.ame) ||
           gamma_test_fails(s.problem, ls.tilde.Ax, ls.tilde.r, ls.tilde.f_val, next.y,
                            next.x, s.config.alpha, s.gamma))) {
        s.halve_gamma();
        engine->reset();
        cache = eval_cache(s.problem, cache.y, s.gamma, c);
        continue;
      }

      if (observer) {
        IterationView view;
        view.current = &cache;
        view.tilde = ls.accepted ? &ls.tilde : nullptr;
        view.next = &next;
        view.tau = tau_rec;
        view.engine = engine.get();
        observer(k, view);
      }
      s.record(k, tau_rec, ls.trials, cache, c, it0);
      cache = std::move(next);
      break;
    }
  }
  return finish(s, cache, SolveStatus::MaxIter, t0);
}

}  // namespace

Solution solve(const Problem& problem, const SolverConfig& config, SolverKind kind, const Vec& y0,
               const Observer& observer) {
  problem.validate();
  config.validate();
  if (y0.size() != problem.dual_dim())
    throw std::invalid_argument("solve: y0 does not match the dual dimension");

  LoopShared s{problem, config, 0.0, config.gamma_backtracking, {}, 0, 0};
  s.gamma = resolve_gamma(problem, config);
  if (!config.gamma0 && !problem.f->affine() && !(problem.f->strong_convexity() > 0.0)) {
    s.backtrack_on = true;  // no usable stepsize bound
  }

  try {
    switch (kind) {
      case SolverKind::Ama:
        return run_ama(s, y0, observer);
      case SolverKind::FastAma:
        return run_fast_ama(s, y0, observer);
      case SolverKind::Nama:
        return run_nama(s, y0, observer);
    }
    throw std::logic_error("solve: unknown solver kind");
  } catch (const std::exception& err) {
    // Oracle/stepsize failure: return the partial trace with a diagnostic.
    Solution sol;
    sol.status = SolveStatus::OracleError;
    sol.iterations = static_cast<int>(s.trace.rows.size());
    sol.x_updates = s.xu_total;
    sol.z_updates = s.zu_total;
    sol.gamma_final = s.gamma;
    s.trace.status = SolveStatus::OracleError;
    s.trace.message = err.what();
    sol.trace = std::move(s.trace);
    return sol;
  }
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::OracleError: return "oracle_error";
  }
  return "unknown";
}

const char* to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Ama: return "ama";
    case SolverKind::FastAma: return "fastama";
    case SolverKind::Nama: return "nama";
  }
  return "unknown";
}

}  // namespace ama
