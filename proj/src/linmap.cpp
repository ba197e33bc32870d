#include "ama/linmap.hpp"

#include <cmath>
#include <stdexcept>

#include "ama/rng.hpp"

namespace ama {

Mat LinearMap::dense() const {
  Mat out(rows(), cols());
  Vec e = Vec::Zero(cols());
  Vec col(rows());
  for (Index j = 0; j < cols(); ++j) {
    e[j] = 1.0;
    apply(e, col);
    out.col(j) = col;
    e[j] = 0.0;
  }
  return out;
}

BlockDiagMap::BlockDiagMap(std::vector<Mat> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw std::invalid_argument("BlockDiagMap: no blocks");
  row_off_.reserve(blocks_.size());
  col_off_.reserve(blocks_.size());
  for (const Mat& B : blocks_) {
    row_off_.push_back(rows_);
    col_off_.push_back(cols_);
    rows_ += B.rows();
    cols_ += B.cols();
  }
}

void BlockDiagMap::apply(const Vec& x, Vec& out) const {
  out.resize(rows_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    out.segment(row_off_[i], blocks_[i].rows()).noalias() =
        blocks_[i] * x.segment(col_off_[i], blocks_[i].cols());
  }
}

void BlockDiagMap::applyAdjoint(const Vec& y, Vec& out) const {
  out.resize(cols_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    out.segment(col_off_[i], blocks_[i].cols()).noalias() =
        blocks_[i].transpose() * y.segment(row_off_[i], blocks_[i].rows());
  }
}

Mat BlockDiagMap::dense() const {
  Mat out = Mat::Zero(rows_, cols_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    out.block(row_off_[i], col_off_[i], blocks_[i].rows(), blocks_[i].cols()) = blocks_[i];
  }
  return out;
}

RowScaledMap::RowScaledMap(std::shared_ptr<const LinearMap> inner, Vec d)
    : inner_(std::move(inner)), d_(std::move(d)) {
  if (d_.size() != inner_->rows()) throw std::invalid_argument("RowScaledMap: size mismatch");
  if (!(d_.array() > 0.0).all() || !d_.allFinite())
    throw std::invalid_argument("RowScaledMap: scaling must be positive and finite");
}

OpNormEstimate operator_norm(const LinearMap& A, double tol, int max_iter) {
  if (tol <= 0.0) throw std::invalid_argument("operator_norm: tol must be positive");
  Rng rng(0x5eed0f2d15u);
  Vec v(A.cols());
  for (Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-1.0, 1.0);
  const double nv = v.norm();
  if (nv == 0.0 || v.size() == 0) return {0.0, true, 0};
  v /= nv;

  Vec Av(A.rows()), AtAv(A.cols());
  OpNormEstimate est;
  double prev = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    A.apply(v, Av);
    est.value = Av.norm();
    est.iterations = it + 1;
    if (est.value == 0.0) {
      // v landed in the null space; reseed once from a shifted stream.
      Rng rng2(0x5eed0f2d15u + static_cast<std::uint64_t>(it) + 1u);
      for (Index i = 0; i < v.size(); ++i) v[i] = rng2.uniform(-1.0, 1.0);
      v /= v.norm();
      continue;
    }
    if (it > 0 && std::abs(est.value - prev) <= tol * est.value) {
      est.converged = true;
      return est;
    }
    prev = est.value;
    A.applyAdjoint(Av, AtAv);
    const double n = AtAv.norm();
    if (n == 0.0) {
      est.converged = true;  // A'Av = 0 with Av != 0 cannot happen; keep safe
      return est;
    }
    v = AtAv / n;
  }
  return est;
}

}  // namespace ama
