#pragma once

#include <memory>
#include <vector>

#include "ama/types.hpp"

namespace ama {

/// Immutable linear map with adjoint. Instances are safe to share across
/// concurrent solves; apply/applyAdjoint are pure.
class LinearMap {
 public:
  virtual ~LinearMap() = default;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;

  /// out = A x
  virtual void apply(const Vec& x, Vec& out) const = 0;
  /// out = A' y
  virtual void applyAdjoint(const Vec& y, Vec& out) const = 0;

  Vec apply(const Vec& x) const {
    Vec out(rows());
    apply(x, out);
    return out;
  }
  Vec applyAdjoint(const Vec& y) const {
    Vec out(cols());
    applyAdjoint(y, out);
    return out;
  }

  /// Dense assembly, intended for small instances (tests, serialization).
  virtual Mat dense() const;
};

class DenseMap final : public LinearMap {
 public:
  using LinearMap::apply;
  using LinearMap::applyAdjoint;
  explicit DenseMap(Mat A) : A_(std::move(A)) {}

  Index rows() const override { return A_.rows(); }
  Index cols() const override { return A_.cols(); }
  void apply(const Vec& x, Vec& out) const override { out.noalias() = A_ * x; }
  void applyAdjoint(const Vec& y, Vec& out) const override { out.noalias() = A_.transpose() * y; }
  Mat dense() const override { return A_; }

  const Mat& matrix() const { return A_; }

 private:
  Mat A_;
};

/// diag(B_0, ..., B_k) with contiguous row/column blocks, matching the
/// per-stage structure of MPC constraint maps.
class BlockDiagMap final : public LinearMap {
 public:
  using LinearMap::apply;
  using LinearMap::applyAdjoint;
  explicit BlockDiagMap(std::vector<Mat> blocks);

  Index rows() const override { return rows_; }
  Index cols() const override { return cols_; }
  void apply(const Vec& x, Vec& out) const override;
  void applyAdjoint(const Vec& y, Vec& out) const override;
  Mat dense() const override;

  const std::vector<Mat>& blocks() const { return blocks_; }
  Index block_row_offset(std::size_t i) const { return row_off_[i]; }
  Index block_col_offset(std::size_t i) const { return col_off_[i]; }

 private:
  std::vector<Mat> blocks_;
  std::vector<Index> row_off_, col_off_;
  Index rows_ = 0, cols_ = 0;
};

/// D * A for a positive diagonal D (dual Jacobi scaling applied to the rows).
class RowScaledMap final : public LinearMap {
 public:
  using LinearMap::apply;
  using LinearMap::applyAdjoint;
  RowScaledMap(std::shared_ptr<const LinearMap> inner, Vec d);

  Index rows() const override { return inner_->rows(); }
  Index cols() const override { return inner_->cols(); }
  void apply(const Vec& x, Vec& out) const override {
    inner_->apply(x, out);
    out.array() *= d_.array();
  }
  void applyAdjoint(const Vec& y, Vec& out) const override {
    scratch_ = d_.cwiseProduct(y);
    inner_->applyAdjoint(scratch_, out);
  }
  Mat dense() const override { return d_.asDiagonal() * inner_->dense(); }

  const Vec& scaling() const { return d_; }

 private:
  std::shared_ptr<const LinearMap> inner_;
  Vec d_;
  mutable Vec scratch_;
};

/// Adjoint view (A'), used e.g. to check operator-norm symmetry.
class AdjointMap final : public LinearMap {
 public:
  using LinearMap::apply;
  using LinearMap::applyAdjoint;
  explicit AdjointMap(std::shared_ptr<const LinearMap> inner) : inner_(std::move(inner)) {}

  Index rows() const override { return inner_->cols(); }
  Index cols() const override { return inner_->rows(); }
  void apply(const Vec& x, Vec& out) const override { inner_->applyAdjoint(x, out); }
  void applyAdjoint(const Vec& y, Vec& out) const override { inner_->apply(y, out); }
  Mat dense() const override { return inner_->dense().transpose(); }

 private:
  std::shared_ptr<const LinearMap> inner_;
};

struct OpNormEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;

  /// Safe upper bound for stepsize rules: the raw estimate inflated by the
  /// relative tolerance it was computed to.
  double inflated(double tol) const { return value * (1.0 + tol); }
};

/// Operator-norm estimate by power iteration on A'A, deterministic seed.
/// On non-convergence the last estimate is reported with converged=false.
OpNormEstimate operator_norm(const LinearMap& A, double tol = 1e-9, int max_iter = 500);

struct DiagonalScaling {
  Vec d;  // strictly positive, one weight per dual coordinate
};

}  // namespace ama
