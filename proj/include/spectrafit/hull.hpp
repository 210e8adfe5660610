#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "spectrafit/error.hpp"

namespace spectrafit {

inline constexpr double kTauDedup = 1e-6;

/// Thrown when the input points span an affine subspace of lower dimension
/// than the ambient one.
class DegenerateHullError : public ValidationError {
 public:
  DegenerateHullError(int affine_rank, int dim)
      : ValidationError("convex hull is degenerate: affine rank " + std::to_string(affine_rank) +
                        " in dimension " + std::to_string(dim)),
        affine_rank_(affine_rank) {}
  int affine_rank() const noexcept { return affine_rank_; }

 private:
  int affine_rank_;
};

/// Vertex, edge and facet counts. For polygons the single 2-face is counted
/// as the facet, so a hull in the plane reports (V, V, 1).
struct FVector {
  int vertices = 0;
  int edges = 0;
  int facets = 0;
  bool operator==(const FVector&) const = default;
};

/// Greedy merge: a point is dropped when it lies within `radius` of an
/// earlier kept point.
std::vector<Eigen::VectorXd> dedup_points(const std::vector<Eigen::VectorXd>& points, double radius);

/// Counter-clockwise hull vertices; collinear boundary points are dropped.
std::vector<Eigen::Vector2d> convex_hull_2d(const std::vector<Eigen::Vector2d>& points);

struct TriangleHull {
  std::vector<Eigen::Vector3d> points;       // deduplicated input
  std::vector<std::array<int, 3>> triangles; // outward-oriented
};

/// Incremental (beneath-beyond) hull. Points within `tau_dedup` of each
/// other are merged first.
TriangleHull convex_hull_3d(const std::vector<Eigen::Vector3d>& points, double tau_dedup = kTauDedup);

/// Face counts of a triangulated hull after merging coplanar neighbours
/// (plane distance below `tol`).
FVector f_vector(const TriangleHull& hull, double tol = kTauDedup);

/// Face counts of conv(points) in d = 2 or 3.
FVector f_vector(const std::vector<Eigen::VectorXd>& points, double tau_dedup = kTauDedup);

/// Indices of the points that are hull vertices (d = 2 or 3).
std::vector<int> hull_vertex_indices(const std::vector<Eigen::VectorXd>& points, double tau_dedup = kTauDedup);

}  // namespace spectrafit
