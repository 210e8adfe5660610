#pragma once

#include <Eigen/Dense>

namespace spectrafit {

struct SymEigen {
  Eigen::VectorXd values;   // diagonal order of the converged iterate, unsorted
  Eigen::MatrixXd vectors;  // column k pairs with values[k]
  int sweeps = 0;
};

struct JacobiOptions {
  double off_tol = 1e-12;  // relative to the Frobenius norm of the input
  int max_sweeps = 30;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Only the upper
/// triangle is read. Throws NumericalError (carrying the off-diagonal norm)
/// if the off-diagonal mass has not dropped below tolerance after
/// `max_sweeps` sweeps.
SymEigen jacobi_eigen(const Eigen::MatrixXd& a, const JacobiOptions& opts = {});

}  // namespace spectrafit
