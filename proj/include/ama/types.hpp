#pragma once

#include <Eigen/Dense>

#include <limits>

namespace ama {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace ama
