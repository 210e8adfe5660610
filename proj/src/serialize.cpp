#include "spectrafit/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spectrafit/error.hpp"
#include "spectrafit/hull.hpp"

namespace spectrafit {

namespace {

Json matrix_rows(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

// NaN is not representable in JSON; failed cells become null.
Json number_or_null(double v) { return std::isnan(v) ? Json(nullptr) : Json(v); }

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Json model_to_json(const SetEstimate& est, const FitResult* fit) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "model";
  j["lift"] = est.lift().to_string();
  j["d"] = est.dim();
  j["map"] = matrix_rows(est.map().coeffs());
  if (fit) {
    j["objective"] = fit->objective;
    j["trace"] = fit->trace;
    j["seed"] = fit->seed;
    j["start_index"] = fit->start_index;
    j["iterations"] = fit->iterations;
    j["stop"] = to_string(fit->stop);
    j["gamma"] = fit->gamma;
  }
  return j;
}

SetEstimate model_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("schema")) throw ValidationError("model JSON: missing schema");
  if (j.at("schema") != kSchemaVersion)
    throw ValidationError("model JSON: unsupported schema " + j.at("schema").dump() + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
  if (j.value("kind", std::string("model")) != "model") throw ValidationError("model JSON: not a model document");
  try {
    const LiftSpec lift = LiftSpec::parse(j.at("lift").get<std::string>());
    const int d = j.at("d").get<int>();
    const auto& rows = j.at("map");
    if (!rows.is_array() || static_cast<int>(rows.size()) != d) throw ValidationError("model JSON: map must have d rows");
    Eigen::MatrixXd m(d, lift.lifted_dim());
    for (int r = 0; r < d; ++r) {
      const auto& row = rows[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<int>(row.size()) != lift.lifted_dim())
        throw ValidationError("model JSON: map row " + std::to_string(r) + " must have " +
                              std::to_string(lift.lifted_dim()) + " entries");
      for (int c = 0; c < lift.lifted_dim(); ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return SetEstimate(lift, LinearMap(std::move(m)));
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("model JSON: ") + e.what());
  }
}

Json lse_to_json(const LsePolytope& poly) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "lse";
  j["objective"] = poly.objective;
  j["certified"] = poly.certified;
  j["iterations"] = poly.iterations;
  j["primal_residual"] = poly.primal_residual;
  j["dual_residual"] = poly.dual_residual;
  j["fitted"] = vector_json(poly.fitted);
  j["points"] = matrix_rows(poly.points.transpose());
  Json verts = Json::array();
  for (const auto& v : poly.dedup_vertices) verts.push_back(vector_json(v));
  j["vertices"] = std::move(verts);
  return j;
}

Json cv_to_json(const CvCurve& curve) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "cv";
  j["partitions"] = curve.partitions;
  j["seed"] = curve.seed;
  Json entries = Json::array();
  for (std::size_t l = 0; l < curve.lifts.size(); ++l) {
    Json e;
    e["lift"] = curve.lifts[l].to_string();
    e["mean_mse"] = number_or_null(curve.mean[l]);
    Json parts = Json::array();
    for (Eigen::Index p = 0; p < curve.partition_mse.cols(); ++p)
      parts.push_back(number_or_null(curve.partition_mse(static_cast<Eigen::Index>(l), p)));
    e["partition_mse"] = std::move(parts);
    e["failures"] = curve.failures[l];
    if (!curve.errors[l].empty()) e["first_error"] = curve.errors[l];
    entries.push_back(std::move(e));
  }
  j["curve"] = std::move(entries);
  return j;
}

Json covariance_to_json(const CovarianceReport& rep) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "covariance";
  j["shape"] = rep.shape;
  j["q"] = rep.q;
  j["n"] = rep.n;
  j["sigma"] = rep.sigma;
  j["trials"] = rep.trials;
  j["seed"] = rep.seed;
  j["used"] = rep.used;
  j["excluded"] = rep.excluded;
  j["exclusion_fraction"] = rep.exclusion_fraction;
  j["objective_gate"] = rep.objective_gate;
  j["valid"] = rep.valid;
  j["max_cross_correlation"] = rep.max_cross_correlation;
  if (rep.qgon_radial_std) j["qgon_radial_std"] = *rep.qgon_radial_std;
  if (rep.qgon_tangential_std) j["qgon_tangential_std"] = *rep.qgon_tangential_std;
  Json verts = Json::array();
  for (const auto& v : rep.vertices) {
    Json e;
    e["vertex"] = vector_json(v.vertex);
    e["empirical"] = matrix_rows(v.empirical);
    e["theory"] = matrix_rows(v.theory);
    e["empirical_eigs"] = vector_json(v.empirical_eigs);
    e["theory_eigs"] = vector_json(v.theory_eigs);
    e["eig_rel_error"] = vector_json(v.eig_rel_error);
    e["eig_std_error"] = vector_json(v.eig_std_error);
    e["radial_std"] = v.radial_std;
    e["tangential_std"] = v.tangential_std;
    e["theory_radial_std"] = v.theory_radial_std;
    e["theory_tangential_std"] = v.theory_tangential_std;
    verts.push_back(std::move(e));
  }
  j["vertices"] = std::move(verts);
  return j;
}

std::string cv_to_csv(const CvCurve& curve) {
  std::ostringstream os;
  os << "lift,lifted_dim,mean_mse\n";
  for (std::size_t l = 0; l < curve.lifts.size(); ++l)
    os << curve.lifts[l].to_string() << ',' << curve.lifts[l].lifted_dim() << ',' << g17(curve.mean[l]) << '\n';
  return os.str();
}

std::string deviations_to_csv(const CovarianceReport& rep) {
  std::ostringstream os;
  const auto cols = rep.deviations.cols();
  const Eigen::Index d = rep.q ? cols / rep.q : 0;
  for (Eigen::Index c = 0; c < cols; ++c) os << (c ? "," : "") << 'v' << c / d << '_' << c % d;
  os << '\n';
  for (Eigen::Index r = 0; r < rep.deviations.rows(); ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) os << (c ? "," : "") << g17(rep.deviations(r, c));
    os << '\n';
  }
  return os.str();
}

std::string points_to_off(const std::vector<Eigen::VectorXd>& points) {
  std::vector<Eigen::Vector3d> p3;
  for (const auto& p : points) {
    if (p.size() != 3) throw ValidationError("OFF output needs 3D points");
    p3.emplace_back(p[0], p[1], p[2]);
  }
  const TriangleHull hull = convex_hull_3d(p3);
  std::ostringstream os;
  // Interior points are not written.
  std::vector<int> index(hull.points.size(), -1);
  std::vector<int> used;
  for (const auto& t : hull.triangles)
    for (int v : t)
      if (index[static_cast<std::size_t>(v)] < 0) {
        index[static_cast<std::size_t>(v)] = static_cast<int>(used.size());
        used.push_back(v);
      }
  os << "OFF\n" << used.size() << ' ' << hull.triangles.size() << " 0\n";
  for (int i : used) {
    const auto& v = hull.points[static_cast<std::size_t>(i)];
    os << g17(v.x()) << ' ' << g17(v.y()) << ' ' << g17(v.z()) << '\n';
  }
  for (const auto& t : hull.triangles)
    os << "3 " << index[static_cast<std::size_t>(t[0])] << ' ' << index[static_cast<std::size_t>(t[1])] << ' '
       << index[static_cast<std::size_t>(t[2])] << '\n';
  return os.str();
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
  if (!out) throw ValidationError("failed writing " + path);
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

SetEstimate read_model(const std::string& path) { return model_from_json(read_json(path)); }

}  // namespace spectrafit
