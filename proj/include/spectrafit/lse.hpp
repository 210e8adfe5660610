#pragma once

#include <vector>

#include <Eigen/Dense>

#include "spectrafit/dataset.hpp"

namespace spectrafit {

/// Settings of the ADMM solver for the witness-point quadratic program.
struct QPConfig {
  double eps_abs = 1e-8;
  double eps_rel = 1e-8;
  int max_iter = 50000;
  double rho = 0.1;      // initial penalty, adapted by residual balancing
  double sigma = 1e-6;   // proximal term on x
  double alpha = 1.6;    // over-relaxation
  int check_every = 10;
  int adapt_every = 50;
  int max_rho_updates = 4;  // each update refactors the KKT matrix
  bool polish = true;      // active-set refinement of the ADMM iterate
  int polish_every = 500;  // minimum spacing of polishing attempts
  double dedup_rel = 1e-4;  // vertex merge radius relative to the data scale
};

/// Polytopal least-squares estimate over all compact convex sets.
struct LsePolytope {
  Eigen::MatrixXd points;  // d x n witness points, column i certifies direction i
  Eigen::VectorXd fitted;  // yhat_i = <u_i, x_i>
  std::vector<Eigen::VectorXd> dedup_vertices;
  double objective = 0.0;  // (1/n) sum (y_i - yhat_i)^2
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool certified = false;  // ADMM met both tolerances
};

/// Minimizes sum (y_i - <u_i, x_i>)^2 subject to <u_j, x_i> <= <u_j, x_j>
/// for all i, j. The ADMM limit is polished onto an exactly consistent
/// witness set: each x_i is replaced by the maximizer of <u_i, .> over the
/// solver's points, so the reported objective belongs to an actual convex
/// set. Not certified results still carry their residuals.
LsePolytope fit_lse(const Dataset& ds, const QPConfig& cfg = {});

/// max over the deduplicated vertices of <x, u>.
double lse_support(const LsePolytope& poly, const Eigen::Ref<const Eigen::VectorXd>& u);

/// Largest violation of <u_j, x_i> <= <u_j, x_j> over all pairs.
double max_consistency_violation(const LsePolytope& poly, const Dataset& ds);

}  // namespace spectrafit
