#pragma once

#include <deque>
#include <memory>

#include "ama/types.hpp"

namespace ama {

/// Secant pair gathered from one accepted line-search step:
///   p = y_trial - y,   q = (z_trial - A x_trial) - (z - A x),
/// so that B_{k+1} p = q approximates the Jacobian of the residual map.
struct SecantPair {
  Vec p;
  Vec q;

  double curvature() const { return p.dot(q); }
};

/// Quasi-Newton engine producing d = H (Ax - z) from gathered secant pairs,
/// H approximating the inverse residual Jacobian. Engines are linear maps for
/// fixed state and are owned by a single solve.
class DirectionEngine {
 public:
  virtual ~DirectionEngine() = default;

  /// d = H r_neg with r_neg = Ax - z. Non-finite output falls back to d = 0
  /// (the caller then performs a plain AMA step).
  Vec propose(const Vec& r_neg) const {
    Vec d = propose_impl(r_neg);
    if (!d.allFinite()) d.setZero();
    return d;
  }

  /// Accepts the pair if its curvature passes the guard; otherwise counts a
  /// skip and leaves the state unchanged.
  virtual void push(const SecantPair& pair) = 0;

  /// Clears all memory back to the seed. Required whenever gamma changes,
  /// since the residual map the pairs sampled is gamma-dependent.
  virtual void reset() = 0;

  virtual int stored_pairs() const = 0;
  int skipped_updates() const { return skipped_; }

 protected:
  virtual Vec propose_impl(const Vec& r_neg) const = 0;

  /// Curvature guard shared by all engines: <p,q> must clear a relative
  /// threshold to keep 1/<p,q> representable.
  static bool curvature_ok(const SecantPair& pair) {
    return pair.curvature() > 1e-12 * pair.p.norm() * pair.q.norm();
  }

  int skipped_ = 0;
};

/// d = 0 always: NAMA degenerates to plain AMA.
class ZeroEngine final : public DirectionEngine {
 public:
  explicit ZeroEngine(Index dim) : dim_(dim) {}
  void push(const SecantPair&) override {}
  void reset() override {}
  int stored_pairs() const override { return 0; }

 protected:
  Vec propose_impl(const Vec&) const override { return Vec::Zero(dim_); }

 private:
  Index dim_;
};

/// Limited-memory BFGS with the two-loop recursion; the seed matrix is
/// <p,q>/<q,q> times the identity from the newest stored pair.
class LbfgsEngine final : public DirectionEngine {
 public:
  explicit LbfgsEngine(int memory = 20);

  void push(const SecantPair& pair) override;
  void reset() override;
  int stored_pairs() const override { return static_cast<int>(pairs_.size()); }

 protected:
  Vec propose_impl(const Vec& r_neg) const override;

 private:
  struct Entry {
    Vec p, q;
    double rho;  // 1 / <q, p>
  };
  int memory_;
  std::deque<Entry> pairs_;  // newest last
};

/// Dense inverse-form BFGS (rank-two updates on H = B^{-1}).
class DenseBfgsEngine final : public DirectionEngine {
 public:
  explicit DenseBfgsEngine(Index dim);

  void push(const SecantPair& pair) override;
  void reset() override;
  int stored_pairs() const override { return pushed_; }

  const Mat& inverse() const { return H_; }

 protected:
  Vec propose_impl(const Vec& r_neg) const override { return H_ * r_neg; }

 private:
  Index dim_;
  Mat H_;
  int pushed_ = 0;
};

/// Dense modified-Broyden update, stored in inverse form via
/// Sherman-Morrison. theta is 1 unless the update denominator gets within 0.1
/// of singular, in which case it is shifted inside [0, 2] to push the
/// denominator back to +-0.1 (Powell-style safeguard).
class DenseBroydenEngine final : public DirectionEngine {
 public:
  explicit DenseBroydenEngine(Index dim);

  void push(const SecantPair& pair) override;
  void reset() override;
  int stored_pairs() const override { return pushed_; }

  const Mat& inverse() const { return H_; }

 protected:
  Vec propose_impl(const Vec& r_neg) const override { return H_ * r_neg; }

 private:
  Index dim_;
  Mat H_;
  int pushed_ = 0;
};

enum class EngineKind { None, Lbfgs, Bfgs, Broyden };

std::unique_ptr<DirectionEngine> make_engine(EngineKind kind, Index dual_dim, int memory);

}  // namespace ama
