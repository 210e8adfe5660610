#include "spectrafit/metrics.hpp"

#include <cmath>

#include "spectrafit/error.hpp"

namespace spectrafit {

double rho_p_from_differences(const Eigen::Ref<const Eigen::VectorXd>& diff, double p) {
  if (!(p >= 1.0)) throw ValidationError("rho_p requires p >= 1");
  if (diff.size() == 0) throw ValidationError("rho_p needs at least one node");
  if (std::isinf(p)) return diff.cwiseAbs().maxCoeff();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < diff.size(); ++i) acc += std::pow(std::abs(diff[i]), p);
  return std::pow(acc / static_cast<double>(diff.size()), 1.0 / p);
}

double rho_p(const SupportFunction& a, const SupportFunction& b, double p, const QuadratureSpec& quad) {
  if (!(p >= 1.0)) throw ValidationError("rho_p requires p >= 1");
  const Eigen::MatrixXd nodes = quadrature_nodes(quad);
  Eigen::VectorXd diff(nodes.cols());
  for (Eigen::Index i = 0; i < nodes.cols(); ++i) {
    const Eigen::VectorXd u = nodes.col(i);
    diff[i] = a(u) - b(u);
  }
  return rho_p_from_differences(diff, p);
}

double rho_p(const SetEstimate& a, const SetEstimate& b, double p, const QuadratureSpec& quad) {
  if (a.dim() != b.dim() || a.dim() != quad.dim)
    throw ValidationError("rho_p: bodies and quadrature must share the ambient dimension");
  return rho_p(support_of(a), support_of(b), p, quad);
}

}  // namespace spectrafit
