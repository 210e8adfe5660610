#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectrafit/linear_map.hpp"

namespace spectrafit {

/// Support-witness points of `est` over `nodes` equally spaced directions
/// (d = 2), consecutive duplicates removed.
std::vector<Eigen::Vector2d> boundary_witnesses_2d(const SetEstimate& est, int nodes);

struct Ellipse {
  Eigen::Vector2d center;
  Eigen::Matrix2d shape;  // points c + L z with L L^T = shape, |z| = 1
};

/// Ellipses {v_k + x : x^T (2 sigma^2 M_kk^{-1})^{-1} x = 1} scaled by
/// `scale`, one per vertex of the regular q-gon.
std::vector<Ellipse> qgon_ellipses(int q, double scale);

struct SvgOptions {
  int nodes = 720;
  std::vector<Ellipse> ellipses;
  std::optional<SetEstimate> reference;  // drawn dashed underneath
  int size_px = 480;
};

/// SVG document with the boundary polyline of a planar estimate.
std::string render_svg(const SetEstimate& est, const SvgOptions& opts = {});

/// OBJ with the witness cloud over an icosphere of about `nodes` directions
/// and its convex hull as triangular faces. Requires d = 3.
std::string render_obj(const SetEstimate& est, int nodes = 2562);

}  // namespace spectrafit
