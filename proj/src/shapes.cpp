#include "spectrafit/shapes.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "spectrafit/error.hpp"

namespace spectrafit {

namespace {

int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || v < 1)
    throw ValidationError("invalid " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

Eigen::Vector3d disc_center(int j) {
  const double t = 2.0 * std::numbers::pi * j / 3.0;
  return {-std::sin(t), std::cos(t), 0.0};
}

Eigen::Vector3d disc_axis(int j) {
  const double t = 2.0 * std::numbers::pi * j / 3.0;
  return {std::cos(t), std::sin(t), 0.0};
}

Eigen::MatrixXd sym_unit(int p, int i, int j) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
  m(i, j) += 1.0;
  if (i != j) m(j, i) += 1.0;
  return m;
}

}  // namespace

ShapeSpec ShapeSpec::l1_ball(int d) {
  if (d < 1) throw ValidationError("ball dimension must be positive");
  return {Kind::L1Ball, d, d};
}
ShapeSpec ShapeSpec::l2_ball(int d) {
  if (d < 1) throw ValidationError("ball dimension must be positive");
  return {Kind::L2Ball, d, d};
}
ShapeSpec ShapeSpec::linf_ball(int d) {
  if (d < 1) throw ValidationError("ball dimension must be positive");
  return {Kind::LInfBall, d, d};
}
ShapeSpec ShapeSpec::regular_gon(int q) {
  if (q < 3) throw ValidationError("regular polygon needs q >= 3");
  return {Kind::RegularGon, 2, q};
}
ShapeSpec ShapeSpec::race_track() { return {Kind::RaceTrack, 2, 0}; }
ShapeSpec ShapeSpec::upillow() { return {Kind::UPillow, 3, 0}; }
ShapeSpec ShapeSpec::three_discs() { return {Kind::ThreeDiscs, 3, 0}; }

ShapeSpec ShapeSpec::from_points(std::vector<Eigen::VectorXd> points, std::string label) {
  if (points.empty()) throw ValidationError("mesh has no vertices");
  const auto d = points.front().size();
  if (d < 1) throw ValidationError("mesh vertices have no coordinates");
  for (const auto& p : points)
    if (p.size() != d) throw ValidationError("mesh vertices have inconsistent dimension");
  if (static_cast<Eigen::Index>(points.size()) < d + 1)
    throw ValidationError("mesh must contain at least d+1 vertices");
  ShapeSpec s(Kind::Mesh, static_cast<int>(d), 0);
  s.points_ = std::move(points);
  s.label_ = std::move(label);
  return s;
}

ShapeSpec ShapeSpec::mesh(const std::string& path) { return from_points(load_mesh(path), path); }

ShapeSpec ShapeSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  const auto name = text.substr(0, colon);
  const auto arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  auto need_arg = [&](std::string_view what) {
    if (arg.empty()) throw ValidationError(std::string(name) + " needs a " + std::string(what));
    return parse_int(arg, what);
  };
  if (name == "l1ball") return l1_ball(need_arg("dimension"));
  if (name == "l2ball") return l2_ball(need_arg("dimension"));
  if (name == "linfball") return linf_ball(need_arg("dimension"));
  if (name == "gon") return regular_gon(need_arg("vertex count"));
  if (name == "racetrack") return race_track();
  if (name == "upillow") return upillow();
  if (name == "threediscs") return three_discs();
  if (name == "mesh") {
    if (arg.empty()) throw ValidationError("mesh needs a path");
    return mesh(std::string(arg));
  }
  throw ValidationError("unknown shape '" + std::string(text) + "'");
}

std::string ShapeSpec::to_string() const {
  switch (kind_) {
    case Kind::L1Ball: return "l1ball:" + std::to_string(dim_);
    case Kind::L2Ball: return "l2ball:" + std::to_string(dim_);
    case Kind::LInfBall: return "linfball:" + std::to_string(dim_);
    case Kind::RegularGon: return "gon:" + std::to_string(param_);
    case Kind::RaceTrack: return "racetrack";
    case Kind::UPillow: return "upillow";
    case Kind::ThreeDiscs: return "threediscs";
    case Kind::Mesh: return "mesh:" + label_;
  }
  return {};
}

double true_support(const ShapeSpec& shape, const Eigen::Ref<const Eigen::VectorXd>& u) {
  if (u.size() != shape.dim())
    throw ValidationError("true_support: direction has dimension " + std::to_string(u.size()) +
                          ", shape " + shape.to_string() + " lives in dimension " +
                          std::to_string(shape.dim()));
  switch (shape.kind()) {
    case ShapeSpec::Kind::L1Ball:
      return u.cwiseAbs().maxCoeff();
    case ShapeSpec::Kind::L2Ball:
      return u.norm();
    case ShapeSpec::Kind::LInfBall:
      return u.cwiseAbs().sum();
    case ShapeSpec::Kind::RegularGon: {
      const int q = shape.param();
      double best = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < q; ++k) {
        const double t = 2.0 * std::numbers::pi * k / q;
        best = std::max(best, std::cos(t) * u[0] + std::sin(t) * u[1]);
      }
      return best;
    }
    case ShapeSpec::Kind::RaceTrack:
      return std::max(-u[0], u[0]) + u.norm();
    case ShapeSpec::Kind::UPillow:
      return shape_realization(shape)->support_value(u);
    case ShapeSpec::Kind::ThreeDiscs: {
      double best = -std::numeric_limits<double>::infinity();
      for (int j = 1; j <= 3; ++j) {
        const double along = disc_axis(j).dot(u);
        best = std::max(best, disc_center(j).dot(u) + std::hypot(along, u[2]));
      }
      return best;
    }
    case ShapeSpec::Kind::Mesh: {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& p : shape.points()) best = std::max(best, p.dot(u));
      return best;
    }
  }
  return 0.0;
}

std::optional<std::vector<Eigen::VectorXd>> shape_vertices(const ShapeSpec& shape) {
  const int d = shape.dim();
  std::vector<Eigen::VectorXd> v;
  switch (shape.kind()) {
    case ShapeSpec::Kind::L1Ball:
      for (int k = 0; k < d; ++k) {
        for (double s : {1.0, -1.0}) {
          Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
          e[k] = s;
          v.push_back(e);
        }
      }
      return v;
    case ShapeSpec::Kind::LInfBall:
      for (int mask = 0; mask < (1 << d); ++mask) {
        Eigen::VectorXd e(d);
        for (int k = 0; k < d; ++k) e[k] = (mask >> k) & 1 ? -1.0 : 1.0;
        v.push_back(e);
      }
      return v;
    case ShapeSpec::Kind::RegularGon:
      for (int k = 0; k < shape.param(); ++k) {
        const double t = 2.0 * std::numbers::pi * k / shape.param();
        v.push_back(Eigen::Vector2d(std::cos(t), std::sin(t)));
      }
      return v;
    case ShapeSpec::Kind::Mesh:
      return shape.points();
    default:
      return std::nullopt;
  }
}

std::optional<SetEstimate> shape_realization(const ShapeSpec& shape) {
  const int d = shape.dim();
  if (auto verts = shape_vertices(shape); verts && shape.kind() != ShapeSpec::Kind::Mesh) {
    Eigen::MatrixXd cols(d, static_cast<Eigen::Index>(verts->size()));
    for (std::size_t j = 0; j < verts->size(); ++j) cols.col(static_cast<Eigen::Index>(j)) = (*verts)[j];
    return SetEstimate(LiftSpec::simplex(static_cast<int>(verts->size())), LinearMap(cols));
  }
  switch (shape.kind()) {
    case ShapeSpec::Kind::L2Ball: {
      if (d == 1) {
        Eigen::MatrixXd cols(1, 2);
        cols << 1.0, -1.0;
        return SetEstimate(LiftSpec::simplex(2), LinearMap(cols));
      }
      if (d == 2) {
        const LiftSpec lift = LiftSpec::spectraplex(2);
        Eigen::MatrixXd a1 = Eigen::MatrixXd::Zero(2, 2);
        a1(0, 0) = 1.0;
        a1(1, 1) = -1.0;
        return SetEstimate(lift, LinearMap::from_matrices(lift, {a1, sym_unit(2, 0, 1)}));
      }
      if (d == 3) {
        // lambda_max([[w, u1, u2], [u1, -w, 0], [u2, 0, -w]]) = |(u1, u2, w)|.
        const LiftSpec lift = LiftSpec::spectraplex(3);
        Eigen::MatrixXd a3 = Eigen::MatrixXd::Identity(3, 3) * -1.0;
        a3(0, 0) = 1.0;
        return SetEstimate(lift, LinearMap::from_matrices(lift, {sym_unit(3, 0, 1), sym_unit(3, 0, 2), a3}));
      }
      const LiftSpec lift = LiftSpec::spectraplex(d + 1);
      std::vector<Eigen::MatrixXd> a;
      for (int k = 1; k <= d; ++k) a.push_back(sym_unit(d + 1, 0, k));
      return SetEstimate(lift, LinearMap::from_matrices(lift, a));
    }
    case ShapeSpec::Kind::RaceTrack: {
      const LiftSpec lift = LiftSpec::spectraplex(4);
      Eigen::MatrixXd a1(4, 4), a2(4, 4);
      a1 << -1, 1, 0, 0,  //
          1, -1, 0, 0,    //
          0, 0, 1, 1,     //
          0, 0, 1, 1;
      a2 = Eigen::Vector4d(1, -1, 1, -1).asDiagonal();
      return SetEstimate(lift, LinearMap::from_matrices(lift, {a1, a2}));
    }
    case ShapeSpec::Kind::UPillow: {
      // (x, y, z) = (X_12, X_23, X_34) over the 4x4 spectraplex.
      const LiftSpec lift = LiftSpec::spectraplex(4);
      return SetEstimate(lift, LinearMap::from_matrices(
                                   lift, {0.5 * sym_unit(4, 0, 1), 0.5 * sym_unit(4, 1, 2),
                                          0.5 * sym_unit(4, 2, 3)}));
    }
    case ShapeSpec::Kind::ThreeDiscs: {
      // Block j maps trace-t 2x2 PSD X to t*c_j + (X11 - X22)*a_j + 2*X12*e3.
      const LiftSpec lift = LiftSpec::blocks({2, 2, 2});
      std::vector<Eigen::MatrixXd> a(3, Eigen::MatrixXd::Zero(6, 6));
      for (int j = 1; j <= 3; ++j) {
        const Eigen::Vector3d c = disc_center(j), ax = disc_axis(j);
        const int o = 2 * (j - 1);
        for (int k = 0; k < 3; ++k) {
          a[k](o, o) = c[k] + ax[k];
          a[k](o + 1, o + 1) = c[k] - ax[k];
        }
        a[2](o, o + 1) = a[2](o + 1, o) = 1.0;
      }
      return SetEstimate(lift, LinearMap::from_matrices(lift, a));
    }
    default:
      return std::nullopt;
  }
}

std::vector<Eigen::VectorXd> load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open mesh '" + path + "'");
  std::vector<Eigen::VectorXd> points;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    throw ValidationError(path + ":" + std::to_string(line_no) + ": " + why);
  };
  auto next_content = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++line_no;
      const auto hash = out.find('#');
      if (hash != std::string::npos) out.erase(hash);
      if (out.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  auto read_xyz = [&](std::istringstream& ss) {
    Eigen::VectorXd p(3);
    for (int k = 0; k < 3; ++k)
      if (!(ss >> p[k]) || !std::isfinite(p[k])) fail("expected three finite coordinates");
    return p;
  };

  if (!next_content(line)) fail("empty mesh file");
  std::istringstream head(line);
  std::string tag;
  head >> tag;
  if (tag == "OFF") {
    long nv = -1, nf = 0;
    if (!(head >> nv)) {
      if (!next_content(line)) fail("missing OFF counts");
      std::istringstream counts(line);
      if (!(counts >> nv >> nf)) fail("malformed OFF counts");
    }
    if (nv < 0) fail("negative vertex count");
    for (long i = 0; i < nv; ++i) {
      if (!next_content(line)) fail("unexpected end of file in vertex list");
      std::istringstream ss(line);
      points.push_back(read_xyz(ss));
    }
    return points;
  }

  // OBJ: only "v x y z" records matter.
  do {
    std::istringstream ss(line);
    std::string kw;
    ss >> kw;
    if (kw == "v") points.push_back(read_xyz(ss));
  } while (next_content(line));
  if (points.empty()) fail("no vertices found (expected OFF header or OBJ 'v' records)");
  return points;
}

}  // namespace spectrafit
