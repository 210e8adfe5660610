#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "spectrafit/linear_map.hpp"

namespace spectrafit {

/// Ground-truth convex bodies used by the synthetic experiments.
class ShapeSpec {
 public:
  enum class Kind { L1Ball, L2Ball, LInfBall, RegularGon, RaceTrack, UPillow, ThreeDiscs, Mesh };

  static ShapeSpec l1_ball(int d);
  static ShapeSpec l2_ball(int d);
  static ShapeSpec linf_ball(int d);
  static ShapeSpec regular_gon(int q);
  static ShapeSpec race_track();
  static ShapeSpec upillow();
  static ShapeSpec three_discs();
  /// Loads the vertex list immediately; faces are ignored.
  static ShapeSpec mesh(const std::string& path);
  static ShapeSpec from_points(std::vector<Eigen::VectorXd> points, std::string label = "points");

  /// "l1ball:3", "l2ball:3", "linfball:3", "gon:5", "racetrack", "upillow",
  /// "threediscs", "mesh:<path>".
  static ShapeSpec parse(std::string_view text);
  std::string to_string() const;

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  /// d for the balls, q for the polygon.
  int param() const { return param_; }
  const std::vector<Eigen::VectorXd>& points() const { return points_; }

 private:
  ShapeSpec(Kind kind, int dim, int param) : kind_(kind), dim_(dim), param_(param) {}

  Kind kind_;
  int dim_;
  int param_;
  std::vector<Eigen::VectorXd> points_;
  std::string label_;
};

/// Exact support function h_K(u). Positively homogeneous, so u need not be
/// normalized.
double true_support(const ShapeSpec& shape, const Eigen::Ref<const Eigen::VectorXd>& u);

/// Extreme points of polytopal shapes (balls in l1 / l_inf, polygons, meshes).
std::optional<std::vector<Eigen::VectorXd>> shape_vertices(const ShapeSpec& shape);

/// A map A* and lift C with A*(C) equal to the shape, when one is known:
/// simplex images for polytopes, spectraplex images for the Euclidean ball,
/// Race Track and UPillow, and a product of three 2x2 blocks for ThreeDiscs.
std::optional<SetEstimate> shape_realization(const ShapeSpec& shape);

/// Vertices of the OFF or OBJ file at `path`.
std::vector<Eigen::VectorXd> load_mesh(const std::string& path);

}  // namespace spectrafit
