#pragma once

#include <vector>

#include <Eigen/Dense>

#include "spectrafit/lift.hpp"

namespace spectrafit {

/// A linear map from the lifted space to R^d, stored as a d x lifted_dim
/// coefficient matrix whose row k is the scaled half-vectorization of the
/// symmetric matrix A_k (so A(X)_k = <A_k, X>). For a simplex lift the
/// columns are the candidate extreme points.
class LinearMap {
 public:
  LinearMap() = default;
  explicit LinearMap(Eigen::MatrixXd coeffs) : coeffs_(std::move(coeffs)) {}

  static LinearMap zeros(int d, int lifted_dim) {
    return LinearMap(Eigen::MatrixXd::Zero(d, lifted_dim));
  }
  /// Builds the map from per-coordinate symmetric matrices A_1..A_d, each of
  /// order lift.order() and block diagonal with the lift's block sizes.
  static LinearMap from_matrices(const LiftSpec& lift, const std::vector<Eigen::MatrixXd>& a);

  int dim() const { return static_cast<int>(coeffs_.rows()); }
  int lifted_dim() const { return static_cast<int>(coeffs_.cols()); }
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }
  Eigen::MatrixXd& coeffs() { return coeffs_; }

  /// A^T u in lifted coordinates.
  Eigen::VectorXd adjoint(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  /// A x for a lifted point x.
  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Block `b` of A_k as a symmetric matrix.
  Eigen::MatrixXd coordinate_block(const LiftSpec& lift, int k, int b) const;

 private:
  Eigen::MatrixXd coeffs_;
};

struct BodySupport {
  double value = 0.0;
  Eigen::VectorXd witness;
};

/// The body A(C), the artifact's model object.
class SetEstimate {
 public:
  SetEstimate(LiftSpec lift, LinearMap map);

  const LiftSpec& lift() const { return lift_; }
  const LinearMap& map() const { return map_; }
  int dim() const { return map_.dim(); }

  BodySupport support(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  double support_value(const Eigen::Ref<const Eigen::VectorXd>& u) const;

 private:
  LiftSpec lift_;
  LinearMap map_;
};

inline BodySupport body_support(const SetEstimate& est, const Eigen::Ref<const Eigen::VectorXd>& u) {
  return est.support(u);
}

}  // namespace spectrafit
