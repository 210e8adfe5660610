#include <cmath>
#include <limits>
#include <set>

#include "doctest.h"
#include "test_util.hpp"

#include "spectrafit/error.hpp"
#include "spectrafit/modelselect.hpp"
#include "spectrafit/shapes.hpp"

using namespace spectrafit;

namespace {

CvCurve curve_of(const std::vector<int>& sizes, const std::vector<double>& mean) {
  CvCurve c;
  for (int q : sizes) c.lifts.push_back(LiftSpec::simplex(q));
  c.mean = mean;
  c.failures.assign(mean.size(), 0);
  c.errors.assign(mean.size(), {});
  c.partitions = 1;
  c.partition_mse = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  return c;
}

}  // namespace

TEST_CASE("partitions split into disjoint halves") {
  const auto p = cv_partition(11, 3, 0);
  CHECK(p.size() == 11);
  CHECK(std::set<int>(p.begin(), p.end()).size() == 11);
  CHECK(cv_partition(11, 3, 0) == p);
  CHECK(cv_partition(11, 3, 1) != p);
  CHECK(cv_partition(11, 4, 0) != p);
}

TEST_CASE("the true lift validates at least as well as smaller ones") {
  const Dataset ds = synth(ShapeSpec::l1_ball(2), 200, NoiseSpec{0.0}, 51);
  FitConfig cfg;
  cfg.starts = 20;
  const CvCurve c = cross_validate(ds, {LiftSpec::simplex(3), LiftSpec::simplex(4)}, 6, cfg, 1);
  CHECK(c.failures == std::vector<int>{0, 0});
  CHECK(c.mean[1] <= c.mean[0]);
  CHECK(c.mean[1] <= 1e-8);
}

TEST_CASE("duplicate and reordered candidates agree") {
  const Dataset ds = synth(ShapeSpec::l1_ball(3), 60, NoiseSpec{0.1}, 52);
  FitConfig cfg;
  cfg.starts = 3;
  cfg.max_iter = 100;
  const std::vector<LiftSpec> lifts{LiftSpec::simplex(4), LiftSpec::simplex(6), LiftSpec::simplex(4),
                                    LiftSpec::spectraplex(2)};
  const CvCurve a = cross_validate(ds, lifts, 5, cfg, 2);
  CHECK(a.mean[0] == a.mean[2]);
  CHECK(a.partition_mse.row(0) == a.partition_mse.row(2));
  const CvCurve b = cross_validate(ds, {lifts[3], lifts[1], lifts[0]}, 5, cfg, 2);
  CHECK(b.partition_mse.row(0) == a.partition_mse.row(3));
  CHECK(b.partition_mse.row(1) == a.partition_mse.row(1));
  CHECK(b.partition_mse.row(2) == a.partition_mse.row(0));
}

TEST_CASE("validation error is invariant under a global rotation") {
  // Paired initializations: the rotated run starts from the rotated map.
  Rng rng(53, 0);
  const Dataset ds = synth(ShapeSpec::l1_ball(3), 60, NoiseSpec{0.1}, 53);
  const Eigen::MatrixXd q = testutil::random_rotation(rng, 3);
  Dataset rot = ds;
  rot.u = q * ds.u;
  const LiftSpec lift = LiftSpec::simplex(6);
  const LinearMap init = initial_map(lift, ds, FitConfig{});
  FitConfig a, b;
  a.init = ExplicitInit{init};
  b.init = ExplicitInit{LinearMap(q * init.coeffs())};
  a.max_iter = b.max_iter = 100;
  const CvCurve ca = cross_validate(ds, {lift}, 8, a, 3), cb = cross_validate(rot, {lift}, 8, b, 3);
  for (int p = 0; p < 8; ++p) CHECK(cb.partition_mse(0, p) == doctest::Approx(ca.partition_mse(0, p)).epsilon(1e-8));
}

TEST_CASE("failed cells are recorded, not averaged") {
  Dataset ds = synth(ShapeSpec::l1_ball(2), 4, NoiseSpec{0.0}, 54);
  FitConfig cfg;
  cfg.gamma = 0.0;
  const CvCurve c = cross_validate(ds, {LiftSpec::simplex(4)}, 3, cfg, 0);
  CHECK(c.failures[0] == 3);
  CHECK(std::isnan(c.mean[0]));
  CHECK_FALSE(c.errors[0].empty());
  CHECK_THROWS_AS(select_knee(c), ValidationError);
}

TEST_CASE("knee rule") {
  CHECK(select_knee(curve_of({4, 5, 6, 7}, {4.0, 3.0, 2.0, 1.0})) == LiftSpec::simplex(7));
  CHECK(select_knee(curve_of({4, 5, 6, 7}, {1.0, 1.0, 1.0, 1.0})) == LiftSpec::simplex(4));
  CHECK(select_knee(curve_of({4, 5, 6, 7, 8}, {3.0, 2.0, 1.02, 1.0, 1.01}), 0.05) == LiftSpec::simplex(6));
  CHECK(select_knee(curve_of({4, 5, 6, 7, 8}, {3.0, 2.0, 1.02, 1.0, 1.01}), 0.0) == LiftSpec::simplex(7));
  // Ordered by lifted dimension, not by listing order.
  CHECK(select_knee(curve_of({7, 4, 5}, {1.0, 1.0, 3.0})) == LiftSpec::simplex(4));
  CHECK_THROWS_AS(select_knee(CvCurve{}), ValidationError);
  CHECK_THROWS_AS(select_knee(curve_of({4}, {1.0}), -0.1), ValidationError);
}

TEST_CASE("cross validation validates its inputs") {
  const Dataset ds = synth(ShapeSpec::l1_ball(2), 10, NoiseSpec{0.0}, 55);
  CHECK_THROWS_AS(cross_validate(ds, {}, 5, FitConfig{}, 0), ValidationError);
  CHECK_THROWS_AS(cross_validate(ds, {LiftSpec::simplex(4)}, 0, FitConfig{}, 0), ValidationError);
  CHECK_THROWS_AS(cross_validate(subset(ds, {0}), {LiftSpec::simplex(4)}, 1, FitConfig{}, 0), ValidationError);
}
