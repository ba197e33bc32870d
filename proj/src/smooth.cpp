#include "ama/smooth.hpp"

#include <Eigen/Eigenvalues>

#include <stdexcept>

namespace ama {

QuadraticOracle::QuadraticOracle(Mat H, Vec q) : H_(std::move(H)), q_(std::move(q)) {
  if (H_.rows() != H_.cols() || H_.rows() != q_.size())
    throw std::invalid_argument("QuadraticOracle: dimension mismatch");
  if (!H_.isApprox(H_.transpose(), 1e-12))
    throw std::invalid_argument("QuadraticOracle: H must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(H_, Eigen::EigenvaluesOnly);
  mu_ = es.eigenvalues().minCoeff();
  if (!(mu_ > 0.0))
    throw std::invalid_argument("QuadraticOracle: H must be positive definite");
  ldlt_.compute(H_);
  if (ldlt_.info() != Eigen::Success)
    throw std::runtime_error("QuadraticOracle: factorization failed");
}

void QuadraticOracle::solve_linear(const Vec& v, Vec& x) const {
  x = ldlt_.solve(-(q_ + v));
}

double QuadraticOracle::value(const Vec& x) const {
  return 0.5 * x.dot(H_ * x) + q_.dot(x);
}

}  // namespace ama
