#include "spectrafit/quadrature.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>
#include <vector>

#include "spectrafit/error.hpp"
#include "spectrafit/random.hpp"

namespace spectrafit {

QuadratureSpec QuadratureSpec::defaults(int dim) {
  if (dim == 2) return {2, 1000, QuadratureKind::Grid, 0};
  if (dim == 3) return {3, 2562, QuadratureKind::Icosphere, 0};
  return {dim, 20000, QuadratureKind::MonteCarlo, 0};
}

Eigen::MatrixXd circle_grid(int n) {
  if (n < 1) throw ValidationError("circle grid needs at least one node");
  Eigen::MatrixXd u(2, n);
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * k / n;
    u(0, k) = std::cos(t);
    u(1, k) = std::sin(t);
  }
  return u;
}

Eigen::MatrixXd icosphere(int subdivisions) {
  if (subdivisions < 0) throw ValidationError("icosphere subdivisions must be nonnegative");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const int idx = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  Eigen::MatrixXd u(3, static_cast<Eigen::Index>(verts.size()));
  for (std::size_t i = 0; i < verts.size(); ++i) u.col(static_cast<Eigen::Index>(i)) = verts[i];
  return u;
}

int icosphere_level(int nodes) {
  long count = 12;
  for (int s = 0; s < 8; ++s) {
    if (count == nodes) return s;
    count = 4 * (count - 2) + 2;
  }
  return -1;
}

Eigen::MatrixXd quadrature_nodes(const QuadratureSpec& spec) {
  if (spec.dim < 1) throw ValidationError("quadrature dimension must be positive");
  if (spec.nodes < 1) throw ValidationError("quadrature needs at least one node");
  switch (spec.kind) {
    case QuadratureKind::Grid:
      if (spec.dim != 2) throw ValidationError("equiangular grid is only defined for d = 2");
      return circle_grid(spec.nodes);
    case QuadratureKind::Icosphere: {
      if (spec.dim != 3) throw ValidationError("icosphere nodes are only defined for d = 3");
      const int level = icosphere_level(spec.nodes);
      if (level < 0)
        throw ValidationError("icosphere node count must be 10*4^k+2 (12, 42, 162, 642, 2562, ...)");
      return icosphere(level);
    }
    case QuadratureKind::MonteCarlo: {
      Eigen::MatrixXd u(spec.dim, spec.nodes);
      Rng rng(spec.seed, 0x51ULL);
      for (int i = 0; i < spec.nodes; ++i) u.col(i) = rng.direction(spec.dim);
      return u;
    }
  }
  return {};
}

}  // namespace spectrafit
