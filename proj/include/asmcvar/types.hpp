#pragma once

#include <Eigen/Dense>

#include <vector>

namespace asmcvar {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Sorted, zero-based asset indices.
using Support = std::vector<Index>;

}  // namespace asmcvar
