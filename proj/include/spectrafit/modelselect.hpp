#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectrafit/fit.hpp"

namespace spectrafit {

/// Validation error of every (lift, partition) cell. Failed cells hold NaN
/// and are left out of the means.
struct CvCurve {
  std::vector<LiftSpec> lifts;
  std::vector<double> mean;
  Eigen::MatrixXd partition_mse;  // lifts x partitions
  std::vector<int> failures;      // per lift
  std::vector<std::string> errors;  // first failure message per lift, empty if none
  int partitions = 0;
  std::uint64_t seed = 0;
};

/// Random halves of the first n - n % 2 records, one split per partition.
/// Partition p depends only on (seed, p, n).
std::vector<int> cv_partition(int n, std::uint64_t seed, int p);

/// Fits every candidate lift on the first half of each partition and
/// records the mean squared error on the second half. The fit seed of a
/// cell depends on the partition alone, so duplicate candidates agree.
CvCurve cross_validate(const Dataset& ds, const std::vector<LiftSpec>& lifts, int partitions,
                       const FitConfig& cfg, std::uint64_t seed);

/// Smallest candidate (by lifted dimension, then listing order) whose mean
/// error is within (1 + slack) of the minimum.
LiftSpec select_knee(const CvCurve& curve, double slack = 0.05);

}  // namespace spectrafit
