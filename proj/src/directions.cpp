#include "ama/directions.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ama {

// --------------------------------------------------------------- L-BFGS

LbfgsEngine::LbfgsEngine(int memory) : memory_(memory) {
  if (memory_ < 1) throw std::invalid_argument("LbfgsEngine: memory must be >= 1");
}

void LbfgsEngine::push(const SecantPair& pair) {
  if (!curvature_ok(pair)) {
    ++skipped_;
    return;
  }
  pairs_.push_back({pair.p, pair.q, 1.0 / pair.curvature()});
  if (static_cast<int>(pairs_.size()) > memory_) pairs_.pop_front();
}

void LbfgsEngine::reset() { pairs_.clear(); }

Vec LbfgsEngine::propose_impl(const Vec& r_neg) const {
  if (pairs_.empty()) return r_neg;
  Vec work = r_neg;
  std::vector<double> alpha(pairs_.size());
  for (std::size_t i = pairs_.size(); i-- > 0;) {
    const Entry& e = pairs_[i];
    alpha[i] = e.rho * e.p.dot(work);
    work.noalias() -= alpha[i] * e.q;
  }
  const Entry& newest = pairs_.back();
  const double seed = newest.p.dot(newest.q) / newest.q.squaredNorm();
  work *= seed;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const Entry& e = pairs_[i];
    const double beta = e.rho * e.q.dot(work);
    work.noalias() += (alpha[i] - beta) * e.p;
  }
  return work;
}

// --------------------------------------------------------------- dense BFGS

DenseBfgsEngine::DenseBfgsEngine(Index dim) : dim_(dim), H_(Mat::Identity(dim, dim)) {}

void DenseBfgsEngine::push(const SecantPair& pair) {
  if (!curvature_ok(pair)) {
    ++skipped_;
    return;
  }
  const double rho = 1.0 / pair.curvature();
  // H <- (I - rho p q') H (I - rho q p') + rho p p'
  const Vec Hq = H_ * pair.q;
  const double qHq = pair.q.dot(Hq);
  H_.noalias() -= rho * (pair.p * Hq.transpose() + Hq * pair.p.transpose());
  H_.noalias() += (rho * rho * qHq + rho) * (pair.p * pair.p.transpose());
  ++pushed_;
}

void DenseBfgsEngine::reset() {
  H_ = Mat::Identity(dim_, dim_);
  pushed_ = 0;
}

// --------------------------------------------------------------- Broyden

DenseBroydenEngine::DenseBroydenEngine(Index dim) : dim_(dim), H_(Mat::Identity(dim, dim)) {}

void DenseBroydenEngine::push(const SecantPair& pair) {
  if (!curvature_ok(pair)) {
    ++skipped_;
    return;
  }
  const double pp = pair.p.squaredNorm();
  const Vec Hq = H_ * pair.q;
  // B <- B + theta (q - Bp) p' / ||p||^2; inverse update denominator is
  // (1 - theta) ||p||^2 + theta <p, Hq>, i.e. (1 - theta) + theta c per unit p.
  const double c = pair.p.dot(Hq) / pp;
  double theta = 1.0;
  const double bar = 0.1;
  if (std::abs(c) < bar) {
    const double s = c >= 0.0 ? 1.0 : -1.0;
    theta = (1.0 - s * bar) / (1.0 - c);  // puts the denominator at s*bar
  }
  const double denom = ((1.0 - theta) + theta * c) * pp;
  if (std::abs(denom) < 1e-12 * pp) {
    ++skipped_;
    return;
  }
  const Vec u = Hq - pair.p;  // H (q - Bp)
  const Vec HtP = H_.transpose() * pair.p;
  H_.noalias() -= (theta / denom) * (u * HtP.transpose());
  ++pushed_;
}

void DenseBroydenEngine::reset() {
  H_ = Mat::Identity(dim_, dim_);
  pushed_ = 0;
}

std::unique_ptr<DirectionEngine> make_engine(EngineKind kind, Index dual_dim, int memory) {
  switch (kind) {
    case EngineKind::None:
      return std::make_unique<ZeroEngine>(dual_dim);
    case EngineKind::Lbfgs:
      return std::make_unique<LbfgsEngine>(memory);
    case EngineKind::Bfgs:
      return std::make_unique<DenseBfgsEngine>(dual_dim);
    case EngineKind::Broyden:
      return std::make_unique<DenseBroydenEngine>(dual_dim);
  }
  throw std::logic_error("make_engine: unknown kind");
}

}  // namespace ama
