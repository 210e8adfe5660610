#include "spectrafit/sym_eigen.hpp"

#include <cmath>

#include "spectrafit/error.hpp"

namespace spectrafit {

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double s = 0.0;
  const auto n = a.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

SymEigen jacobi_eigen(const Eigen::MatrixXd& input, const JacobiOptions& opts) {
  if (input.rows() != input.cols())
    throw ValidationError("jacobi_eigen: matrix is not square");
  const Eigen::Index n = input.rows();

  Eigen::MatrixXd a = input.triangularView<Eigen::Upper>();
  a.triangularView<Eigen::StrictlyLower>() = a.transpose().triangularView<Eigen::StrictlyLower>();

  SymEigen out;
  out.vectors = Eigen::MatrixXd::Identity(n, n);
  const double scale = a.norm();
  const double threshold = opts.off_tol * (scale > 0.0 ? scale : 1.0);

  double off = off_diagonal_norm(a);
  while (off > threshold) {
    if (out.sweeps == opts.max_sweeps)
      throw NumericalError("jacobi_eigen: no convergence after max sweeps", off);
    ++out.sweeps;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle zeroing a(p,q); t is the smaller root of
        // t^2 + 2 theta t - 1 = 0.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = out.vectors(k, p), vkq = out.vectors(k, q);
          out.vectors(k, p) = c * vkp - s * vkq;
          out.vectors(k, q) = s * vkp + c * vkq;
        }
      }
    }
    off = off_diagonal_norm(a);
  }
  out.values = a.diagonal();
  return out;
}

}  // namespace spectrafit
