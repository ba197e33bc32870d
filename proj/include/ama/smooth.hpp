#pragma once

#include <Eigen/Cholesky>

#include <memory>

#include "ama/types.hpp"

namespace ama {

/// Strongly convex term f, exposed through its partial-minimization oracle:
/// solve_linear(v) = argmin_x { f(x) + <v, x> }. The solver always calls it
/// with v = A'y, which makes this exactly the alternating x-minimization.
class SmoothOracle {
 public:
  virtual ~SmoothOracle() = default;

  virtual Index dim() const = 0;
  virtual void solve_linear(const Vec& v, Vec& x) const = 0;
  Vec solve_linear(const Vec& v) const {
    Vec x(dim());
    solve_linear(v, x);
    return x;
  }

  virtual double value(const Vec& x) const = 0;

  /// Strong-convexity modulus mu_f; 0 means unknown (forces gamma
  /// backtracking instead of the closed-form stepsize bound).
  virtual double strong_convexity() const = 0;

  /// True when solve_linear is affine in v (quadratic f); enables reuse of
  /// x-steps across line-search trials and the dual-Hessian diagnostics.
  virtual bool affine() const = 0;
};

/// f(x) = 1/2 x'Hx + q'x with H symmetric positive definite.
class QuadraticOracle final : public SmoothOracle {
 public:
  using SmoothOracle::solve_linear;
  QuadraticOracle(Mat H, Vec q);

  Index dim() const override { return q_.size(); }
  void solve_linear(const Vec& v, Vec& x) const override;
  double value(const Vec& x) const override;
  double strong_convexity() const override { return mu_; }
  bool affine() const override { return true; }

  const Mat& hessian() const { return H_; }
  const Vec& linear() const { return q_; }

 private:
  Mat H_;
  Vec q_;
  Eigen::LDLT<Mat> ldlt_;
  double mu_ = 0.0;
};

}  // namespace ama
