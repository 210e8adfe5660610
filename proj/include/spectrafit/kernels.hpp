#pragma once

#include <vector>

#include <Eigen/Dense>

#include "spectrafit/dataset.hpp"
#include "spectrafit/lift.hpp"
#include "spectrafit/linear_map.hpp"

// Data-parallel inner loops of the estimator. Every kernel has a plain
// serial reference and an OpenMP variant. The OpenMP variants reduce over a
// chunk partition fixed by n alone and summed in chunk order, so their
// output does not depend on the thread count.
namespace spectrafit::kernels {

enum class Exec { Serial, Parallel };

/// Maximizer assignment e_i = e_C(A^T u_i) for every measurement.
struct Assignment {
  Eigen::VectorXd values;      // h_C(A^T u_i)
  std::vector<int> block;      // block holding e_i
  Eigen::MatrixXd generators;  // column i: top eigenvector, zero padded to the largest block
};

void assign(const LiftSpec& lift, const LinearMap& map, const Dataset& ds, Assignment& out, Exec exec);

/// (1/n) sum (y_i - values_i)^2, summed in index order.
double mean_squared_residual(const Eigen::VectorXd& values, const Eigen::VectorXd& y);

/// (2/n) sum (h_i - y_i) u_i (x) e_i as a d x lifted_dim coefficient matrix.
Eigen::MatrixXd gradient(const LiftSpec& lift, const Dataset& ds, const Assignment& asg, Exec exec);

/// Per-block normal equations of the least-squares step with the
/// assignment held fixed. Block b's unknowns are the d x block_dim(b)
/// coefficient sub-matrix, vectorized column-major.
struct NormalEquations {
  std::vector<Eigen::MatrixXd> gram;
  std::vector<Eigen::VectorXd> rhs;
};

NormalEquations normal_equations(const LiftSpec& lift, const Dataset& ds, const Assignment& asg, Exec exec);

/// Reductions use min(n / kMinChunk, kChunks) chunks, at least one.
inline constexpr int kChunks = 64;
inline constexpr int kMinChunk = 256;

}  // namespace spectrafit::kernels
