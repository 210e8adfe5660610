#pragma once

#include <vector>

#include <Eigen/Dense>

namespace spectrafit {

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials, O(q^3)). Entry r of the result is the column matched to
/// row r.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace spectrafit
