#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spectrafit/dataset.hpp"
#include "spectrafit/kernels.hpp"
#include "spectrafit/linear_map.hpp"

namespace spectrafit {

/// Entries i.i.d. N(0, scale^2), symmetric per block; scale <= 0 selects
/// RMS(y) / sqrt(order).
struct RandomGaussianInit {
  double scale = 0.0;
};

/// Simplex columns drawn uniformly on the sphere of radius `radius`
/// (<= 0 selects RMS(y)), so every column starts as an extreme point.
struct RandomSphereInit {
  double radius = 0.0;
};

struct ExplicitInit {
  LinearMap map;
};

/// Sphere columns for simplex lifts, Gaussian blocks otherwise.
struct RandomDefaultInit {};

using InitSpec = std::variant<RandomDefaultInit, RandomGaussianInit, RandomSphereInit, ExplicitInit>;

struct FitConfig {
  /// Tikhonov weight; unset selects 1e-6 * mean(y^2).
  std::optional<double> gamma;
  int max_iter = 500;
  double tol_obj = 1e-10;
  double tol_map = 1e-8;
  int starts = 1;
  InitSpec init = RandomDefaultInit{};
  std::uint64_t seed = 0;

  void validate() const;
};

enum class StopReason { ObjectiveTolerance, MapTolerance, MaxIterations };

std::string to_string(StopReason r);

struct FitResult {
  SetEstimate estimate;
  double objective = 0.0;     // objective of `estimate`, the best iterate visited
  std::vector<double> trace;  // objective of every iterate, in order
  int start_index = 0;
  int iterations = 0;         // least-squares updates performed
  StopReason stop = StopReason::MaxIterations;
  std::uint64_t seed = 0;
  double gamma = 0.0;
};

/// All runs of a multi-start fit plus the winner.
struct FitReport {
  FitResult best;
  std::vector<FitResult> runs;
};

/// Phi(A, P_n) = (1/n) sum (y_i - h_C(A^T u_i))^2.
double objective(const SetEstimate& est, const Dataset& ds);

/// Derivative of Phi at A: (2/n) sum (h_C(A^T u_i) - y_i) u_i (x) e_C(A^T u_i).
LinearMap gradient(const SetEstimate& est, const Dataset& ds);

double default_gamma(const Dataset& ds);

LinearMap initial_map(const LiftSpec& lift, const Dataset& ds, const FitConfig& cfg);

/// One least-squares step with the assignment held fixed: the minimizer of
/// (1/n) sum (y_i - <u_i (x) e_i, A>)^2 + (gamma/n) ||A - prev||_F^2.
/// Throws NumericalError if gamma = 0 and the system is singular.
LinearMap ridge_update(const LiftSpec& lift, const Dataset& ds, const kernels::Assignment& asg,
                       const LinearMap& prev, double gamma);

/// Alternating minimization from a single initialization drawn with cfg.seed.
FitResult fit_once(const Dataset& ds, const LiftSpec& lift, const FitConfig& cfg);

/// cfg.starts independent runs with seeds cfg.seed + s; returns the
/// lowest-objective run (ties go to the earlier start).
FitResult fit(const Dataset& ds, const LiftSpec& lift, const FitConfig& cfg);
FitReport fit_all(const Dataset& ds, const LiftSpec& lift, const FitConfig& cfg,
                  kernels::Exec exec = kernels::Exec::Parallel);

}  // namespace spectrafit
