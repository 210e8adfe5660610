#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace spectrafit {

enum class QuadratureKind { Grid, Icosphere, MonteCarlo };

/// Node set on S^{d-1}; all nodes carry equal weight.
struct QuadratureSpec {
  int dim = 2;
  int nodes = 1000;
  QuadratureKind kind = QuadratureKind::Grid;
  std::uint64_t seed = 0;

  /// 1000-point circle for d = 2, 2562-node icosphere for d = 3,
  /// 20000 seeded Monte-Carlo nodes otherwise.
  static QuadratureSpec defaults(int dim);
};

/// Directions (cos 2 pi k/n, sin 2 pi k/n), k = 0..n-1, as columns.
Eigen::MatrixXd circle_grid(int n);

/// Vertices of the icosahedron after `subdivisions` rounds of edge-midpoint
/// refinement, projected to the unit sphere: 10 * 4^s + 2 columns.
Eigen::MatrixXd icosphere(int subdivisions);

/// Number of subdivisions giving exactly `nodes` icosphere vertices, or -1.
int icosphere_level(int nodes);

Eigen::MatrixXd quadrature_nodes(const QuadratureSpec& spec);

}  // namespace spectrafit
