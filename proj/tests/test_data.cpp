#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "test_util.hpp"

#include "spectrafit/dataset.hpp"
#include "spectrafit/error.hpp"
#include "spectrafit/quadrature.hpp"
#include "spectrafit/shapes.hpp"

using namespace spectrafit;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& body) {
  const fs::path p = fs::temp_directory_path() / ("spectrafit_test_" + name);
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST_CASE("true support examples") {
  CHECK(true_support(ShapeSpec::l1_ball(3), Eigen::Vector3d(1, 0, 0)) == 1.0);
  CHECK(true_support(ShapeSpec::linf_ball(3), Eigen::Vector3d(1, 1, 1) / std::sqrt(3.0)) ==
        doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(true_support(ShapeSpec::l2_ball(4), Eigen::Vector4d(0.5, 0.5, 0.5, 0.5)) == doctest::Approx(1.0));
  CHECK(true_support(ShapeSpec::regular_gon(4), Eigen::Vector2d(1, 1) / std::sqrt(2.0)) ==
        doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(true_support(ShapeSpec::l1_ball(3), Eigen::Vector2d(1, 0)), ValidationError);
}

TEST_CASE("race track support matches boundary sampling of its discs") {
  const int samples = 100000;
  auto brute = [&](const Eigen::Vector2d& u) {
    double best = -1e300;
    for (int k = 0; k < samples; ++k) {
      const double t = 2.0 * std::numbers::pi * k / samples;
      for (double cx : {-1.0, 1.0}) best = std::max(best, (cx + std::cos(t)) * u[0] + std::sin(t) * u[1]);
    }
    return best;
  };
  CHECK(true_support(ShapeSpec::race_track(), Eigen::Vector2d(0, 1)) == 1.0);
  CHECK(brute(Eigen::Vector2d(0, 1)) == doctest::Approx(1.0).epsilon(1e-9));
  Rng rng(11, 0);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Vector2d u = rng.direction(2);
    CHECK(true_support(ShapeSpec::race_track(), u) == doctest::Approx(brute(u)).epsilon(1e-8));
  }
}

TEST_CASE("three discs realization matches the closed form") {
  const ShapeSpec shape = ShapeSpec::three_discs();
  const SetEstimate real = *shape_realization(shape);
  Rng rng(12, 0);
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd u = rng.direction(3);
    CHECK(real.support_value(u) == doctest::Approx(true_support(shape, u)).epsilon(1e-10));
  }
}

TEST_CASE("realizations reproduce the true support") {
  Rng rng(13, 0);
  for (const char* name : {"l1ball:3", "l2ball:2", "l2ball:3", "l2ball:5", "linfball:3", "gon:7", "racetrack",
                           "upillow", "threediscs"}) {
    const ShapeSpec shape = ShapeSpec::parse(name);
    const auto real = shape_realization(shape);
    REQUIRE(real.has_value());
    for (int t = 0; t < 100; ++t) {
      const Eigen::VectorXd u = rng.direction(shape.dim());
      CHECK(real->support_value(u) == doctest::Approx(true_support(shape, u)).epsilon(1e-10));
    }
  }
}

TEST_CASE("true support is positively homogeneous") {
  Rng rng(14, 0);
  for (const char* name : {"l1ball:3", "l2ball:3", "linfball:4", "gon:5", "racetrack", "upillow", "threediscs"}) {
    const ShapeSpec shape = ShapeSpec::parse(name);
    const Eigen::VectorXd u = rng.direction(shape.dim());
    CHECK(true_support(shape, 3.0 * u) == doctest::Approx(3.0 * true_support(shape, u)).epsilon(1e-12));
  }
}

TEST_CASE("shape parsing round-trips and rejects junk") {
  for (const char* name : {"l1ball:3", "l2ball:2", "linfball:3", "gon:5", "racetrack", "upillow", "threediscs"})
    CHECK(ShapeSpec::parse(name).to_string() == name);
  CHECK_THROWS_AS(ShapeSpec::parse("gon"), ValidationError);
  CHECK_THROWS_AS(ShapeSpec::parse("torus:3"), ValidationError);
  CHECK_THROWS_AS(ShapeSpec::parse("gon:2"), ValidationError);
}

TEST_CASE("noiseless synth is exact") {
  const ShapeSpec shape = ShapeSpec::linf_ball(3);
  const Dataset ds = synth(shape, 500, NoiseSpec{0.0}, 3);
  CHECK(ds.size() == 500);
  for (int i = 0; i < ds.size(); ++i) CHECK(ds.y[i] == true_support(shape, ds.u.col(i)));
}

TEST_CASE("synth is deterministic in its seed") {
  const ShapeSpec shape = ShapeSpec::regular_gon(5);
  const Dataset a = synth(shape, 200, NoiseSpec{0.1}, 42), b = synth(shape, 200, NoiseSpec{0.1}, 42);
  const Dataset c = synth(shape, 200, NoiseSpec{0.1}, 43);
  CHECK(a.u == b.u);
  CHECK(a.y == b.y);
  CHECK(a.meta == b.meta);
  CHECK(a.y != c.y);
}

TEST_CASE("synth noise is centered at the Monte-Carlo rate") {
  const ShapeSpec shape = ShapeSpec::l2_ball(3);
  const int n = 10000;
  const double sigma = 0.1;
  const Dataset ds = synth(shape, n, NoiseSpec{sigma}, 7);
  double mean = 0.0, var = 0.0;
  for (int i = 0; i < n; ++i) mean += ds.y[i] - 1.0;
  mean /= n;
  for (int i = 0; i < n; ++i) var += std::pow(ds.y[i] - 1.0 - mean, 2);
  var /= n - 1;
  CHECK(std::abs(mean) <= 3.0 * sigma / std::sqrt(n));
  CHECK(std::sqrt(var) == doctest::Approx(sigma).epsilon(0.05));
}

TEST_CASE("synth directions are uniform") {
  const Dataset ds = synth(ShapeSpec::l2_ball(3), 100000, NoiseSpec{0.0}, 8);
  CHECK(ds.u.rowwise().mean().norm() <= 0.02);
  CHECK((ds.u.colwise().norm().array() - 1.0).abs().maxCoeff() <= 1e-12);
  // Second moment of a uniform direction is I/d.
  const Eigen::MatrixXd m = ds.u * ds.u.transpose() / ds.size();
  CHECK((m - Eigen::Matrix3d::Identity() / 3.0).cwiseAbs().maxCoeff() <= 0.01);
}

TEST_CASE("synth validates its parameters") {
  CHECK_THROWS_AS(synth(ShapeSpec::l1_ball(2), 0, NoiseSpec{0.0}, 0), ValidationError);
  CHECK_THROWS_AS(synth(ShapeSpec::l1_ball(2), 5, NoiseSpec{-1.0}, 0), ValidationError);
}

TEST_CASE("synth grid examples") {
  const Dataset axes = synth_grid(ShapeSpec::l1_ball(2), (Eigen::MatrixXd(2, 4) << 1, -1, 0, 0, 0, 0, 1, -1).finished());
  CHECK(axes.y == Eigen::Vector4d(1, 1, 1, 1));
  CHECK(synth_grid(ShapeSpec::l2_ball(3), icosphere(4)).size() == 2562);
  const Dataset gon = synth_grid(ShapeSpec::regular_gon(5), circle_grid(1000));
  CHECK(gon.size() == 1000);
  CHECK(gon.y.maxCoeff() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(synth_grid(ShapeSpec::l1_ball(3), circle_grid(10)), ValidationError);
}

TEST_CASE("subset keeps records in order") {
  const Dataset ds = synth(ShapeSpec::l1_ball(2), 10, NoiseSpec{0.1}, 1);
  const Dataset s = subset(ds, {7, 2, 2});
  CHECK(s.size() == 3);
  CHECK(s.y[0] == ds.y[7]);
  CHECK(s.u.col(1) == ds.u.col(2));
}

TEST_CASE("dataset validation") {
  Dataset ds = synth(ShapeSpec::l1_ball(2), 4, NoiseSpec{0.0}, 1);
  ds.validate();
  ds.u(0, 1) *= 1.1;
  CHECK_THROWS_AS(ds.validate(), ValidationError);
  Dataset empty;
  CHECK_THROWS_AS(empty.validate(), ValidationError);
}

TEST_CASE("CSV round trip is bit exact") {
  const Dataset ds = synth(ShapeSpec::upillow(), 50, NoiseSpec{0.3}, 5);
  const fs::path p = fs::temp_directory_path() / "spectrafit_test_roundtrip.csv";
  write_csv(ds, p.string());
  const Dataset back = read_csv(p.string());
  CHECK(back.u == ds.u);
  CHECK(back.y == ds.y);
  CHECK(back.meta == ds.meta);
  CHECK(parse_csv(to_csv(ds)).y == ds.y);
  fs::remove(p);
}

TEST_CASE("malformed CSV lines are reported with their line number") {
  auto message = [](const std::string& text) {
    try {
      parse_csv(text, "data.csv");
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("u1,u2,y\n1,0,1\n0,1\n").find("data.csv:3") != std::string::npos);
  CHECK(message("u1,u2,y\n1,0,abc\n").find("data.csv:2") != std::string::npos);
  CHECK(message("a,b,c\n").find("data.csv:1") != std::string::npos);
  CHECK(message("u1,u2,y\n0.5,0,1\n").find("unit") != std::string::npos);
}

TEST_CASE("OFF and OBJ meshes") {
  const fs::path off = temp_file("tet.off", "OFF\n# tetrahedron\n4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n"
                                            "3 0 1 2\n3 0 1 3\n3 0 2 3\n3 1 2 3\n");
  CHECK(load_mesh(off.string()).size() == 4);

  std::string cube = "# cube\n";
  for (int mask = 0; mask < 8; ++mask)
    cube += "v " + std::to_string(mask & 1 ? 1 : -1) + " " + std::to_string(mask & 2 ? 1 : -1) + " " +
            std::to_string(mask & 4 ? 1 : -1) + "\n";
  cube += "f 1 2 4 3\n";
  const fs::path obj = temp_file("cube.obj", cube);
  const ShapeSpec shape = ShapeSpec::mesh(obj.string());
  CHECK(shape.points().size() == 8);
  Rng rng(15, 0);
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd u = rng.direction(3);
    CHECK(true_support(shape, u) == doctest::Approx(u.cwiseAbs().sum()).epsilon(1e-14));
  }

  const fs::path bad = temp_file("bad.off", "OFF\n2 0 0\n0 0 0\n1 x 0\n");
  try {
    load_mesh(bad.string());
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find(":4") != std::string::npos);
  }
  CHECK_THROWS_AS(load_mesh("/nonexistent/mesh.off"), ValidationError);
  fs::remove(off);
  fs::remove(obj);
  fs::remove(bad);
}
