#pragma once

#include <functional>
#include <limits>

#include <Eigen/Dense>

#include "spectrafit/linear_map.hpp"
#include "spectrafit/quadrature.hpp"

namespace spectrafit {

using SupportFunction = std::function<double(const Eigen::VectorXd&)>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// L_p distance between two support functions on the sphere, taken under
/// the normalized (probability) uniform measure. The raw surface-measure
/// integral is larger by |S^{d-1}|^{1/p}. p = infinity returns the maximum
/// over the nodes, a grid approximation of the Hausdorff distance.
double rho_p(const SupportFunction& a, const SupportFunction& b, double p, const QuadratureSpec& quad);
double rho_p(const SetEstimate& a, const SetEstimate& b, double p, const QuadratureSpec& quad);

/// Same reduction over precomputed support differences at equal-weight nodes.
double rho_p_from_differences(const Eigen::Ref<const Eigen::VectorXd>& diff, double p);

inline SupportFunction support_of(const SetEstimate& est) {
  return [est](const Eigen::VectorXd& u) { return est.support_value(u); };
}

}  // namespace spectrafit
