#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "test_util.hpp"

#include "spectrafit/error.hpp"
#include "spectrafit/fit.hpp"
#include "spectrafit/hull.hpp"
#include "spectrafit/render.hpp"
#include "spectrafit/serialize.hpp"
#include "spectrafit/shapes.hpp"
#include "spectrafit/stats.hpp"

using namespace spectrafit;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("spectrafit_io_" + name)).string();
}

// The filled polygon of an SVG produced by render_svg.
std::vector<Eigen::Vector2d> svg_polygon(const std::string& svg) {
  const std::regex poly("<polygon points=\"([^\"]*)\" fill=\"#cfe0f3\"");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, poly));
  std::vector<Eigen::Vector2d> out;
  std::istringstream is(m[1].str());
  std::string tok;
  while (is >> tok) {
    const auto c = tok.find(',');
    out.emplace_back(std::stod(tok.substr(0, c)), std::stod(tok.substr(c + 1)));
  }
  return out;
}

FitResult fit_cross_polytope_2d() {
  const Dataset ds = synth(ShapeSpec::l1_ball(2), 200, NoiseSpec{0.0}, 7);
  FitConfig cfg;
  cfg.starts = 20;
  cfg.seed = 3;
  return fit(ds, LiftSpec::simplex(4), cfg);
}

}  // namespace

TEST_CASE("model JSON round trips exactly") {
  Rng rng(11);
  for (const LiftSpec& lift : {LiftSpec::simplex(5), LiftSpec::spectraplex(3), LiftSpec::blocks({2, 1})}) {
    const SetEstimate est(lift, LinearMap(testutil::random_matrix(rng, 3, lift.lifted_dim())));
    const std::string path = temp_path("model.json");
    write_json(path, model_to_json(est));
    const SetEstimate back = read_model(path);
    CHECK(back.lift() == lift);
    CHECK(back.map().coeffs() == est.map().coeffs());
    std::filesystem::remove(path);
  }
}

TEST_CASE("model JSON carries fit diagnostics") {
  const Dataset ds = synth(ShapeSpec::l1_ball(2), 50, NoiseSpec{0.05}, 4);
  FitConfig cfg;
  cfg.starts = 2;
  const FitResult r = fit(ds, LiftSpec::simplex(4), cfg);
  const Json j = model_to_json(r.estimate, &r);
  CHECK(j.at("schema") == kSchemaVersion);
  CHECK(j.at("kind") == "model");
  CHECK(model_from_json(j).map().coeffs() == r.estimate.map().coeffs());
}

TEST_CASE("unsupported schemas are rejected") {
  const SetEstimate est(LiftSpec::simplex(3), LinearMap::zeros(2, 3));
  Json j = model_to_json(est);
  j["schema"] = kSchemaVersion + 1;
  CHECK_THROWS_AS(model_from_json(j), ValidationError);
  j.erase("schema");
  CHECK_THROWS_AS(model_from_json(j), ValidationError);
  Json k = model_to_json(est);
  k["kind"] = "lse";
  CHECK_THROWS_AS(model_from_json(k), ValidationError);
  Json bad = model_to_json(est);
  bad["map"][0].erase(0);
  CHECK_THROWS_AS(model_from_json(bad), ValidationError);
  CHECK_THROWS_AS(read_model(temp_path("does_not_exist.json")), ValidationError);
}

TEST_CASE("SVG of the fitted cross-polytope has four hull vertices") {
  const FitResult r = fit_cross_polytope_2d();
  REQUIRE(r.objective <= 1e-10);
  const std::string svg = render_svg(r.estimate);
  CHECK(svg.rfind("<svg", 0) == 0);
  const auto pts = svg_polygon(svg);
  std::vector<Eigen::VectorXd> pv;
  for (const auto& p : pts) pv.push_back(p);
  CHECK(f_vector(pv, 1e-3) == FVector{4, 4, 1});
}

TEST_CASE("SVG rendering rejects other dimensions") {
  const SetEstimate est(LiftSpec::simplex(4), LinearMap::zeros(3, 4));
  CHECK_THROWS_AS(render_svg(est), ValidationError);
  const SetEstimate flat(LiftSpec::simplex(4), LinearMap::zeros(2, 4));
  CHECK_THROWS_AS(render_obj(flat), ValidationError);
}

TEST_CASE("q-gon ellipse overlay follows the block eigensystem") {
  const auto ell = qgon_ellipses(5, 0.1);
  REQUIRE(ell.size() == 5);
  for (int k = 0; k < 5; ++k) {
    const Eigen::Matrix2d expected = 0.02 * qgon_block(5, k).inverse();
    CHECK((ell[static_cast<std::size_t>(k)].shape - expected).norm() <= 1e-12 * expected.norm());
  }
  const SetEstimate gon = *shape_realization(ShapeSpec::parse("gon:5"));
  SvgOptions opts;
  opts.ellipses = ell;
  const std::string svg = render_svg(gon, opts);
  std::size_t polygons = 0;
  for (auto at = svg.find("<polygon"); at != std::string::npos; at = svg.find("<polygon", at + 1)) ++polygons;
  CHECK(polygons == 1 + 5);
}

TEST_CASE("OBJ of a 3D model satisfies Euler's formula") {
  Rng rng(5);
  for (const LiftSpec& lift : {LiftSpec::simplex(6), LiftSpec::simplex(12), LiftSpec::spectraplex(3)}) {
    const SetEstimate est(lift, LinearMap(testutil::random_matrix(rng, 3, lift.lifted_dim())));
    const std::string path = temp_path("model.obj");
    write_text(path, render_obj(est, 642));

    std::ifstream in(path);
    std::string line;
    int nv = 0, nf = 0;
    while (std::getline(in, line)) {
      if (line.rfind("v ", 0) == 0) ++nv;
      if (line.rfind("f ", 0) == 0) ++nf;
    }
    // Triangulated closed surface: V - 3F/2 + F = 2.
    CHECK(2 * nv - nf == 4);

    const auto verts = load_mesh(path);
    CHECK(static_cast<int>(verts.size()) == nv);
    const FVector fv = f_vector(verts);
    CHECK(fv.vertices - fv.edges + fv.facets == 2);
    std::filesystem::remove(path);
  }
}

TEST_CASE("OFF output of LSE-style points reloads to the same hull") {
  std::vector<Eigen::VectorXd> pts;
  for (int s : {-1, 1})
    for (int k = 0; k < 3; ++k) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(3);
      v[k] = s;
      pts.push_back(v);
    }
  pts.push_back(Eigen::VectorXd::Zero(3));
  const std::string path = temp_path("octa.off");
  write_text(path, points_to_off(pts));
  const auto back = load_mesh(path);
  CHECK(back.size() == 6);
  CHECK(f_vector(back) == FVector{6, 12, 8});
  std::filesystem::remove(path);
}

TEST_CASE("CV curve writers") {
  CvCurve curve;
  curve.lifts = {LiftSpec::simplex(4), LiftSpec::simplex(5)};
  curve.mean = {0.5, 0.25};
  curve.partition_mse = Eigen::MatrixXd::Constant(2, 3, 0.5);
  curve.failures = {0, 0};
  curve.errors = {"", ""};
  curve.partitions = 3;
  const std::string csv = cv_to_csv(curve);
  std::istringstream is(csv);
  std::string header, row;
  std::getline(is, header);
  CHECK(header == "lift,lifted_dim,mean_mse");
  int rows = 0;
  while (std::getline(is, row)) ++rows;
  CHECK(rows == 2);
  const Json j = cv_to_json(curve);
  CHECK(j.at("schema") == kSchemaVersion);
  CHECK(j.at("kind") == "cv");
}
