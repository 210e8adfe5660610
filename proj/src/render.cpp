#include "spectrafit/render.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "spectrafit/error.hpp"
#include "spectrafit/hull.hpp"
#include "spectrafit/quadrature.hpp"
#include "spectrafit/stats.hpp"

namespace spectrafit {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::vector<Eigen::Vector2d> boundary_witnesses_2d(const SetEstimate& est, int nodes) {
  if (est.dim() != 2) throw ValidationError("SVG rendering needs d = 2, got d = " + std::to_string(est.dim()));
  if (nodes < 3) throw ValidationError("render: need at least 3 nodes");
  std::vector<Eigen::Vector2d> out;
  for (int k = 0; k < nodes; ++k) {
    const double t = 2.0 * std::numbers::pi * k / nodes;
    const Eigen::VectorXd w = est.support(Eigen::Vector2d(std::cos(t), std::sin(t))).witness;
    const Eigen::Vector2d p(w[0], w[1]);
    if (out.empty() || (out.back() - p).norm() > kTauDedup) out.push_back(p);
  }
  if (out.size() > 1 && (out.front() - out.back()).norm() <= kTauDedup) out.pop_back();
  return out;
}

std::vector<Ellipse> qgon_ellipses(int q, double scale) {
  std::vector<Ellipse> out;
  for (int k = 0; k < q; ++k) {
    const double t = 2.0 * std::numbers::pi * k / q;
    out.push_back({Eigen::Vector2d(std::cos(t), std::sin(t)), scale * scale * 2.0 * qgon_block(q, k).inverse()});
  }
  return out;
}

std::string render_svg(const SetEstimate& est, const SvgOptions& opts) {
  const auto pts = boundary_witnesses_2d(est, opts.nodes);
  std::vector<Eigen::Vector2d> ref;
  if (opts.reference) ref = boundary_witnesses_2d(*opts.reference, opts.nodes);

  // Ellipse outlines are sampled so the view box covers them.
  std::vector<std::vector<Eigen::Vector2d>> rings;
  for (const auto& e : opts.ellipses) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(e.shape);
    const Eigen::Matrix2d l = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    std::vector<Eigen::Vector2d> ring;
    for (int k = 0; k < 96; ++k) {
      const double t = 2.0 * std::numbers::pi * k / 96;
      ring.push_back(e.center + l * Eigen::Vector2d(std::cos(t), std::sin(t)));
    }
    rings.push_back(std::move(ring));
  }

  double extent = 1e-9;
  auto grow = [&](const std::vector<Eigen::Vector2d>& v) {
    for (const auto& p : v) extent = std::max(extent, p.cwiseAbs().maxCoeff());
  };
  grow(pts);
  grow(ref);
  for (const auto& r : rings) grow(r);
  extent *= 1.1;
  const double px = opts.size_px;
  auto sx = [&](double x) { return fmt((x + extent) / (2.0 * extent) * px); };
  auto sy = [&](double y) { return fmt((extent - y) / (2.0 * extent) * px); };
  auto polygon = [&](const std::vector<Eigen::Vector2d>& v, const std::string& style) {
    std::string s = "  <polygon points=\"";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + sx(v[i].x()) + "," + sy(v[i].y());
    return s + "\" " + style + "/>\n";
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.size_px << "\" height=\"" << opts.size_px
     << "\" viewBox=\"0 0 " << opts.size_px << ' ' << opts.size_px << "\">\n";
  os << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!ref.empty()) os << polygon(ref, "fill=\"none\" stroke=\"#888\" stroke-dasharray=\"4 3\"");
  os << polygon(pts, "fill=\"#cfe0f3\" stroke=\"#1f4e89\" stroke-width=\"1.5\"");
  for (const auto& r : rings) os << polygon(r, "fill=\"none\" stroke=\"#c0392b\"");
  os << "</svg>\n";
  return os.str();
}

std::string render_obj(const SetEstimate& est, int nodes) {
  if (est.dim() != 3) throw ValidationError("OBJ rendering needs d = 3, got d = " + std::to_string(est.dim()));
  if (nodes < 12) throw ValidationError("render: need at least 12 nodes in 3D");
  int level = 0;
  while (10 * (1 << (2 * level)) + 2 < nodes && level < 8) ++level;
  const Eigen::MatrixXd dirs = icosphere(level);
  std::vector<Eigen::Vector3d> cloud;
  for (Eigen::Index k = 0; k < dirs.cols(); ++k) {
    const Eigen::VectorXd w = est.support(dirs.col(k)).witness;
    cloud.emplace_back(w[0], w[1], w[2]);
  }
  const TriangleHull hull = convex_hull_3d(cloud);
  std::ostringstream os;
  os << "# witness-point hull\n";
  for (const auto& v : hull.points) os << "v " << fmt(v.x()) << ' ' << fmt(v.y()) << ' ' << fmt(v.z()) << '\n';
  for (const auto& t : hull.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  return os.str();
}

}  // namespace spectrafit
