#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "spectrafit/random.hpp"

namespace testutil {

inline Eigen::MatrixXd random_symmetric(spectrafit::Rng& rng, int p) {
  Eigen::MatrixXd m(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) m(i, j) = m(j, i) = rng.normal();
  return m;
}

inline Eigen::MatrixXd random_matrix(spectrafit::Rng& rng, int r, int c) {
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

inline Eigen::MatrixXd random_rotation(spectrafit::Rng& rng, int d) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, d, d));
  Eigen::MatrixXd q = qr.householderQ();
  return q;
}

}  // namespace testutil
