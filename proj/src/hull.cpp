#include "spectrafit/hull.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <unordered_map>

namespace spectrafit {

namespace {

double extent(const std::vector<Eigen::Vector3d>& pts) {
  Eigen::Vector3d lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return std::max(1.0, (hi - lo).maxCoeff());
}

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

struct Face {
  std::array<int, 3> v;
  Eigen::Vector3d normal;
  double offset = 0.0;
  bool alive = true;
};

Face make_face(const std::vector<Eigen::Vector3d>& pts, int a, int b, int c) {
  Face f{{a, b, c}, (pts[b] - pts[a]).cross(pts[c] - pts[a]), 0.0, true};
  const double len = f.normal.norm();
  if (len > 0.0) f.normal /= len;
  f.offset = f.normal.dot(pts[a]);
  return f;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

int planar_rank(const std::vector<Eigen::Vector2d>& pts, double eps) {
  if (pts.empty()) return -1;
  std::size_t far = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = (pts[i] - pts[0]).norm();
    if (d > best) best = d, far = i;
  }
  if (best <= eps) return 0;
  const Eigen::Vector2d dir = (pts[far] - pts[0]) / best;
  for (const auto& p : pts) {
    const Eigen::Vector2d r = p - pts[0];
    if (std::abs(dir.x() * r.y() - dir.y() * r.x()) > eps) return 2;
  }
  return 1;
}

}  // namespace

std::vector<Eigen::VectorXd> dedup_points(const std::vector<Eigen::VectorXd>& points, double radius) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a][0] < points[b][0]; });
  std::vector<bool> dropped(points.size(), false);
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::size_t i = order[oi];
    if (dropped[i]) continue;
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const std::size_t j = order[oj];
      if (points[j][0] - points[i][0] > radius) break;
      if (!dropped[j] && (points[j] - points[i]).norm() <= radius) dropped[j] = true;
    }
  }
  std::vector<Eigen::VectorXd> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!dropped[i]) out.push_back(points[i]);
  return out;
}

std::vector<Eigen::Vector2d> convex_hull_2d(const std::vector<Eigen::Vector2d>& input) {
  std::vector<Eigen::Vector2d> pts = input;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  if (pts.size() < 3) return pts;
  double scale = 1.0;
  for (const auto& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double eps = 1e-12 * scale * scale;

  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= eps) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= eps) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

TriangleHull convex_hull_3d(const std::vector<Eigen::Vector3d>& input, double tau_dedup) {
  std::vector<Eigen::VectorXd> generic(input.begin(), input.end());
  TriangleHull out;
  for (const auto& p : dedup_points(generic, tau_dedup)) out.points.emplace_back(p);
  auto& pts = out.points;
  if (pts.empty()) throw DegenerateHullError(-1, 3);

  const double eps = 1e-10 * extent(pts);

  // Initial simplex from extreme points.
  int i0 = 0;
  for (int i = 1; i < static_cast<int>(pts.size()); ++i)
    if (pts[i].x() < pts[i0].x()) i0 = i;
  int i1 = i0;
  double best = 0.0;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    const double d = (pts[i] - pts[i0]).norm();
    if (d > best) best = d, i1 = i;
  }
  if (best <= eps) throw DegenerateHullError(0, 3);
  const Eigen::Vector3d axis = (pts[i1] - pts[i0]).normalized();
  int i2 = i0;
  best = 0.0;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    const Eigen::Vector3d r = pts[i] - pts[i0];
    const double d = (r - axis * axis.dot(r)).norm();
    if (d > best) best = d, i2 = i;
  }
  if (best <= eps) throw DegenerateHullError(1, 3);
  const Eigen::Vector3d plane_n = axis.cross(pts[i2] - pts[i0]).normalized();
  int i3 = i0;
  best = 0.0;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    const double d = std::abs(plane_n.dot(pts[i] - pts[i0]));
    if (d > best) best = d, i3 = i;
  }
  if (best <= eps) throw DegenerateHullError(2, 3);

  std::vector<Face> faces;
  std::unordered_map<std::uint64_t, int> edge_owner;
  auto add_face = [&](int a, int b, int c) {
    faces.push_back(make_face(pts, a, b, c));
    const int idx = static_cast<int>(faces.size()) - 1;
    edge_owner[edge_key(a, b)] = idx;
    edge_owner[edge_key(b, c)] = idx;
    edge_owner[edge_key(c, a)] = idx;
  };

  const Eigen::Vector3d centroid = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
  for (const auto& tri : std::array<std::array<int, 3>, 4>{
           {{i0, i1, i2}, {i0, i1, i3}, {i0, i2, i3}, {i1, i2, i3}}}) {
    const Face f = make_face(pts, tri[0], tri[1], tri[2]);
    if (f.normal.dot(centroid) - f.offset > 0.0)
      add_face(tri[0], tri[2], tri[1]);
    else
      add_face(tri[0], tri[1], tri[2]);
  }

  std::vector<int> visible;
  std::vector<std::pair<int, int>> horizon;
  for (int p = 0; p < static_cast<int>(pts.size()); ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    visible.clear();
    for (int f = 0; f < static_cast<int>(faces.size()); ++f)
      if (faces[f].alive && faces[f].normal.dot(pts[p]) - faces[f].offset > eps) visible.push_back(f);
    if (visible.empty()) continue;

    for (int f : visible) faces[f].alive = false;
    horizon.clear();
    for (int f : visible) {
      const auto& v = faces[f].v;
      for (int e = 0; e < 3; ++e) {
        const int a = v[e], b = v[(e + 1) % 3];
        const auto it = edge_owner.find(edge_key(b, a));
        if (it != edge_owner.end() && faces[it->second].alive) horizon.emplace_back(a, b);
      }
    }
    for (int f : visible) {
      const auto& v = faces[f].v;
      for (int e = 0; e < 3; ++e) {
        const auto it = edge_owner.find(edge_key(v[e], v[(e + 1) % 3]));
        if (it != edge_owner.end() && it->second == f) edge_owner.erase(it);
      }
    }
    for (const auto& [a, b] : horizon) add_face(a, b, p);
  }

  for (const auto& f : faces)
    if (f.alive) out.triangles.push_back(f.v);
  return out;
}

FVector f_vector(const TriangleHull& hull, double tol) {
  const auto& pts = hull.points;
  const auto& tris = hull.triangles;
  const int nt = static_cast<int>(tris.size());
  const double plane_tol = tol * extent(pts);

  std::unordered_map<std::uint64_t, int> owner;
  for (int t = 0; t < nt; ++t)
    for (int e = 0; e < 3; ++e) owner[edge_key(tris[t][e], tris[t][(e + 1) % 3])] = t;

  UnionFind groups(nt);
  for (int t = 0; t < nt; ++t) {
    const Face f = make_face(pts, tris[t][0], tris[t][1], tris[t][2]);
    for (int e = 0; e < 3; ++e) {
      const auto it = owner.find(edge_key(tris[t][(e + 1) % 3], tris[t][e]));
      if (it == owner.end()) continue;
      const int g = it->second;
      bool coplanar = true;
      for (int k = 0; k < 3; ++k)
        coplanar = coplanar && std::abs(f.normal.dot(pts[tris[g][k]]) - f.offset) <= plane_tol;
      if (coplanar) groups.unite(t, g);
    }
  }

  std::set<int> facet_ids;
  std::set<std::pair<int, int>> facet_edges;
  std::vector<std::set<int>> incident(pts.size());
  for (int t = 0; t < nt; ++t) {
    const int gt = groups.find(t);
    facet_ids.insert(gt);
    for (int e = 0; e < 3; ++e) {
      incident[tris[t][e]].insert(gt);
      const auto it = owner.find(edge_key(tris[t][(e + 1) % 3], tris[t][e]));
      if (it == owner.end()) continue;
      const int gn = groups.find(it->second);
      if (gn != gt) facet_edges.insert(std::minmax(gt, gn));
    }
  }
  FVector fv;
  for (const auto& s : incident)
    if (s.size() >= 3) ++fv.vertices;
  fv.edges = static_cast<int>(facet_edges.size());
  fv.facets = static_cast<int>(facet_ids.size());
  return fv;
}

FVector f_vector(const std::vector<Eigen::VectorXd>& points, double tau_dedup) {
  if (points.empty()) throw DegenerateHullError(-1, 0);
  const auto d = points.front().size();
  if (d == 2) {
    std::vector<Eigen::Vector2d> pts;
    for (const auto& p : dedup_points(points, tau_dedup)) pts.emplace_back(p);
    const int rank = planar_rank(pts, 1e-10 * std::max(1.0, pts.front().norm()));
    if (rank < 2) throw DegenerateHullError(rank, 2);
    const int v = static_cast<int>(convex_hull_2d(pts).size());
    return {v, v, 1};
  }
  if (d == 3) {
    std::vector<Eigen::Vector3d> pts(points.begin(), points.end());
    return f_vector(convex_hull_3d(pts, tau_dedup), tau_dedup);
  }
  throw ValidationError("f_vector supports d = 2 or 3 only");
}

std::vector<int> hull_vertex_indices(const std::vector<Eigen::VectorXd>& points, double tau_dedup) {
  if (points.empty()) return {};
  const auto d = points.front().size();
  std::vector<Eigen::VectorXd> kept;
  if (d == 2) {
    std::vector<Eigen::Vector2d> pts;
    for (const auto& p : dedup_points(points, tau_dedup)) pts.emplace_back(p);
    for (const auto& h : convex_hull_2d(pts)) kept.emplace_back(h);
  } else if (d == 3) {
    std::vector<Eigen::Vector3d> pts(points.begin(), points.end());
    const TriangleHull hull = convex_hull_3d(pts, tau_dedup);
    std::set<int> used;
    for (const auto& t : hull.triangles) used.insert(t.begin(), t.end());
    for (int i : used) kept.emplace_back(hull.points[i]);
  } else {
    throw ValidationError("hull_vertex_indices supports d = 2 or 3 only");
  }
  std::vector<int> idx;
  for (const auto& k : kept) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if ((points[i] - k).norm() <= tau_dedup) {
        idx.push_back(static_cast<int>(i));
        break;
      }
    }
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace spectrafit
