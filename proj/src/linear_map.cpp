#include "spectrafit/linear_map.hpp"

#include "spectrafit/error.hpp"

namespace spectrafit {

LinearMap LinearMap::from_matrices(const LiftSpec& lift, const std::vector<Eigen::MatrixXd>& a) {
  const int order = lift.order();
  Eigen::MatrixXd coeffs(static_cast<Eigen::Index>(a.size()), lift.lifted_dim());
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].rows() != order || a[k].cols() != order)
      throw ValidationError("from_matrices: coordinate matrix has wrong order");
    int diag = 0;
    for (int b = 0; b < lift.num_blocks(); ++b) {
      const int p = lift.block_size(b);
      const Eigen::MatrixXd blk = a[k].block(diag, diag, p, p);
      const Eigen::MatrixXd sym = 0.5 * (blk + blk.transpose());
      coeffs.row(static_cast<Eigen::Index>(k)).segment(lift.block_offset(b), lift.block_dim(b)) =
          svec(sym).transpose();
      diag += p;
    }
  }
  return LinearMap(std::move(coeffs));
}

Eigen::VectorXd LinearMap::adjoint(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  if (u.size() != coeffs_.rows())
    throw ValidationError("adjoint: direction has dimension " + std::to_string(u.size()) +
                          ", map expects " + std::to_string(coeffs_.rows()));
  return coeffs_.transpose() * u;
}

Eigen::VectorXd LinearMap::apply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != coeffs_.cols()) throw ValidationError("apply: lifted point has wrong length");
  return coeffs_ * x;
}

Eigen::MatrixXd LinearMap::coordinate_block(const LiftSpec& lift, int k, int b) const {
  const Eigen::VectorXd row = coeffs_.row(k).transpose();
  return smat(row.segment(lift.block_offset(b), lift.block_dim(b)), lift.block_size(b));
}

SetEstimate::SetEstimate(LiftSpec lift, LinearMap map) : lift_(std::move(lift)), map_(std::move(map)) {
  if (map_.lifted_dim() != lift_.lifted_dim())
    throw ValidationError("map has " + std::to_string(map_.lifted_dim()) + " lifted coordinates, lift " +
                          lift_.to_string() + " has " + std::to_string(lift_.lifted_dim()));
  if (map_.dim() < 1) throw ValidationError("map must have positive ambient dimension");
}

BodySupport SetEstimate::support(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  const SupportPoint sp = lift_support_point(lift_, map_.adjoint(u));
  return {sp.value, map_.apply(lift_point(lift_, sp))};
}

double SetEstimate::support_value(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  return lift_support_point(lift_, map_.adjoint(u)).value;
}

}  // namespace spectrafit
