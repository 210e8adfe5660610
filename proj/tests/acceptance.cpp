// Acceptance run: one PASS/FAIL line per criterion. Optional arguments pick
// criteria by number, e.g. `acceptance 1 4`.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spectrafit/dataset.hpp"
#include "spectrafit/fit.hpp"
#include "spectrafit/hull.hpp"
#include "spectrafit/lse.hpp"
#include "spectrafit/metrics.hpp"
#include "spectrafit/modelselect.hpp"
#include "spectrafit/quadrature.hpp"
#include "spectrafit/random.hpp"
#include "spectrafit/shapes.hpp"
#include "spectrafit/stats.hpp"

using namespace spectrafit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string fv_str(const FVector& f) { return fmt("(%d,%d,%d)", f.vertices, f.edges, f.facets); }

std::vector<Eigen::VectorXd> columns(const SetEstimate& est) {
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index c = 0; c < est.map().coeffs().cols(); ++c) out.push_back(est.map().coeffs().col(c));
  return out;
}

FVector safe_f_vector(const SetEstimate& est) {
  try {
    return f_vector(columns(est));
  } catch (const DegenerateHullError&) {
    return {};
  }
}

double rho_to_shape(const SetEstimate& est, const ShapeSpec& shape, double p, const QuadratureSpec& quad) {
  return rho_p(support_of(est), [shape](const Eigen::VectorXd& u) { return true_support(shape, u); }, p, quad);
}

FitConfig starts_cfg(int starts, std::uint64_t seed = 0) {
  FitConfig cfg;
  cfg.starts = starts;
  cfg.seed = seed;
  return cfg;
}

Outcome exact_simplex() {
  const ShapeSpec shape = ShapeSpec::l1_ball(3);
  const Dataset ds = synth(shape, 200, NoiseSpec{0.0}, 0);
  const FitResult r = fit(ds, LiftSpec::simplex(6), starts_cfg(50));
  const double rho = rho_to_shape(r.estimate, shape, kInfinity, QuadratureSpec::defaults(3));
  const FVector fv = safe_f_vector(r.estimate);
  return {rho <= 1e-3 && fv == FVector{6, 12, 8},
          fmt("rho_inf=%.3g f=%s objective=%.3g", rho, fv_str(fv).c_str(), r.objective)};
}

Outcome exact_spectraplex() {
  const ShapeSpec shape = ShapeSpec::l2_ball(3);
  const Dataset ds = synth(shape, 20, NoiseSpec{0.0}, 0);
  const FitResult r = fit(ds, LiftSpec::spectraplex(3), starts_cfg(50));
  QuadratureSpec quad = QuadratureSpec::defaults(3);
  quad.kind = QuadratureKind::Icosphere;
  quad.nodes = 2562;
  const double rho = rho_to_shape(r.estimate, shape, kInfinity, quad);
  return {rho <= 1e-3, fmt("rho_inf=%.3g on %d nodes, objective=%.3g", rho, quad.nodes, r.objective)};
}

Outcome lse_dominance() {
  struct Case {
    const char* shape;
    LiftSpec lift;
  };
  const Case cases[] = {{"gon:5", LiftSpec::simplex(5)},
                        {"linfball:3", LiftSpec::simplex(8)},
                        {"l2ball:2", LiftSpec::spectraplex(2)},
                        {"l1ball:3", LiftSpec::simplex(6)}};
  double worst = -kInfinity;
  int certified = 0;
  for (int k = 0; k < 20; ++k) {
    const Case& c = cases[k % 4];
    const Dataset ds = synth(ShapeSpec::parse(c.shape), 40 + 5 * (k % 5), NoiseSpec{0.1}, 100 + k);
    const FitResult r = fit(ds, c.lift, starts_cfg(10, 7 * k));
    const LsePolytope poly = fit_lse(ds);
    worst = std::max(worst, poly.objective - r.objective);
    certified += poly.certified;
  }
  return {worst <= 1e-6, fmt("max(lse - fit)=%.3g, %d/20 certified", worst, certified)};
}

Outcome gradient_fd() {
  Rng rng(4, 0);
  const double step = 1e-6;
  double worst = 0.0;
  const LiftSpec lifts[] = {LiftSpec::simplex(6), LiftSpec::spectraplex(3), LiftSpec::blocks({2, 2, 1})};
  for (int t = 0; t < 20; ++t) {
    const LiftSpec& lift = lifts[t % 3];
    const Dataset ds = synth(ShapeSpec::l1_ball(3), 80, NoiseSpec{0.1}, 300 + t);
    Eigen::MatrixXd a(3, lift.lifted_dim());
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
    const SetEstimate est(lift, LinearMap(a));
    const Eigen::MatrixXd g = gradient(est, ds).coeffs();
    Eigen::MatrixXd fd(g.rows(), g.cols());
    for (int r = 0; r < g.rows(); ++r)
      for (int c = 0; c < g.cols(); ++c) {
        Eigen::MatrixXd plus = a, minus = a;
        plus(r, c) += step;
        minus(r, c) -= step;
        fd(r, c) = (objective(SetEstimate(lift, LinearMap(plus)), ds) -
                    objective(SetEstimate(lift, LinearMap(minus)), ds)) / (2 * step);
      }
    worst = std::max(worst, (g - fd).norm() / g.norm());
  }
  return {worst <= 1e-5, fmt("max relative error %.3g over 20 points", worst)};
}

Outcome gamma_closed_forms() {
  const long long samples = 10'000'000;
  double worst = 0.0;
  const ShapeSpec gon = ShapeSpec::regular_gon(5);
  const GammaBlocks g = gamma_mc(shape_realization(gon)->map(), samples, 1);
  for (int k = 0; k < 5; ++k) {
    const Eigen::Matrix2d closed = qgon_block(5, k);
    const Eigen::MatrixXd mc = kQgonMeasureFactor * g.blocks[static_cast<std::size_t>(k)];
    worst = std::max(worst, (mc - closed).cwiseAbs().maxCoeff() / closed.cwiseAbs().maxCoeff());
  }
  const ShapeSpec cube = ShapeSpec::linf_ball(3);
  const auto verts = *shape_vertices(cube);
  const GammaBlocks h = gamma_mc(shape_realization(cube)->map(), samples, 2);
  for (std::size_t j = 0; j < verts.size(); ++j) {
    const Eigen::MatrixXd closed = linf_block(3, verts[j]);
    const Eigen::MatrixXd mc = kLinfMeasureFactor * h.blocks[j];
    worst = std::max(worst, (mc - closed).cwiseAbs().maxCoeff() / closed.cwiseAbs().maxCoeff());
  }
  return {worst <= 0.02, fmt("max entry error %.3g of block max, 1e7 samples", worst)};
}

Outcome covariance() {
  CovarianceConfig cfg;
  cfg.shape = ShapeSpec::regular_gon(5);
  cfg.n = 4000;
  cfg.sigma = 0.1;
  cfg.trials = 300;
  const CovarianceReport rep = mc_vertex_covariance(cfg);
  double eig = 0.0, radial = 0.0, tangential = 0.0;
  for (const auto& v : rep.vertices) {
    eig = std::max(eig, v.eig_rel_error.cwiseAbs().maxCoeff());
    radial = std::max(radial, std::abs(v.radial_std / *rep.qgon_radial_std - 1.0));
    tangential = std::max(tangential, std::abs(v.tangential_std / *rep.qgon_tangential_std - 1.0));
  }
  return {rep.valid && eig <= 0.25 && radial <= 0.25 && tangential <= 0.25,
          fmt("used %d/%d, eig err %.3g, radial err %.3g, tangential err %.3g", rep.used, rep.trials, eig, radial,
              tangential)};
}

Outcome consistency_trend() {
  const ShapeSpec shape = ShapeSpec::l1_ball(3);
  const QuadratureSpec quad = QuadratureSpec::defaults(3);
  std::vector<double> medians;
  for (int n : {50, 200, 800}) {
    std::vector<double> rho;
    for (int s = 0; s < 20; ++s) {
      const Dataset ds = synth(shape, n, NoiseSpec{0.1}, 1000 + s);
      const FitResult r = fit(ds, LiftSpec::simplex(6), starts_cfg(20, 50 * s));
      rho.push_back(rho_to_shape(r.estimate, shape, 2.0, quad));
    }
    std::nth_element(rho.begin(), rho.begin() + 10, rho.end());
    const double hi = rho[10];
    const double lo = *std::max_element(rho.begin(), rho.begin() + 10);
    medians.push_back(0.5 * (lo + hi));
  }
  return {medians[0] > medians[1] && medians[1] > medians[2],
          fmt("median rho_2 %.4g > %.4g > %.4g", medians[0], medians[1], medians[2])};
}

Outcome cv_knee() {
  const Dataset ds = synth(ShapeSpec::l1_ball(3), 100, NoiseSpec{0.1}, 0);
  std::vector<LiftSpec> lifts;
  for (int q = 4; q <= 9; ++q) lifts.push_back(LiftSpec::simplex(q));
  const CvCurve curve = cross_validate(ds, lifts, 50, starts_cfg(30), 0);
  const LiftSpec knee = select_knee(curve, 0.05);
  std::ostringstream os;
  os << "knee " << knee.to_string() << ", mean mse";
  for (double m : curve.mean) os << ' ' << fmt("%.5f", m);
  return {knee == LiftSpec::simplex(6), os.str()};
}

Outcome tammes() {
  const ShapeSpec ball = ShapeSpec::l2_ball(3);
  const Dataset ds = synth_grid(ball, icosphere(4));
  const std::pair<int, FVector> targets[] = {{4, {4, 6, 4}}, {6, {6, 12, 8}}, {12, {12, 30, 20}}};
  bool all = true;
  std::ostringstream os;
  for (const auto& [q, target] : targets) {
    const FitReport rep = fit_all(ds, LiftSpec::simplex(q), starts_cfg(50));
    int hits = 0;
    for (const auto& r : rep.runs) hits += safe_f_vector(r.estimate) == target;
    all = all && hits > 0;
    os << (q == 4 ? "" : "; ") << fmt("q=%d: %d/%zu runs with f=%s", q, hits, rep.runs.size(), fv_str(target).c_str());
  }
  return {all, os.str()};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "exact recovery, simplex", 60, exact_simplex},
      {2, "exact recovery, spectraplex", 60, exact_spectraplex},
      {3, "LSE dominance", 120, lse_dominance},
      {4, "gradient vs finite differences", 10, gradient_fd},
      {5, "Gamma closed forms", 120, gamma_closed_forms},
      {6, "asymptotic vertex covariance", 900, covariance},
      {7, "consistency trend", 600, consistency_trend},
      {8, "cross-validation knee", 600, cv_knee},
      {9, "polyhedral ball approximation", 1200, tammes},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!pick.empty() && !pick.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("%s %d %s: %s [%.1fs, budget %.0fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.budget_s);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
