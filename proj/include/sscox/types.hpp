#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace sscox {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntVector = std::vector<int>;

}  // namespace sscox
