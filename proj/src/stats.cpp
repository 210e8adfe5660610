#include "spectrafit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <omp.h>

#include "spectrafit/assignment.hpp"
#include "spectrafit/error.hpp"
#include "spectrafit/random.hpp"

namespace spectrafit {

namespace {

constexpr long long kGammaChunk = 1 << 16;
constexpr std::uint64_t kGammaStream = 0x6A000000ULL;
constexpr std::uint64_t kTrialStream = 0x7100000000ULL;
// Objectives below this are indistinguishable from zero for gating.
constexpr double kGateFloor = 1e-12;

void check_distinct_columns(const Eigen::MatrixXd& c) {
  const double scale = 1.0 + c.cwiseAbs().maxCoeff();
  for (Eigen::Index a = 0; a < c.cols(); ++a)
    for (Eigen::Index b = a + 1; b < c.cols(); ++b)
      if ((c.col(a) - c.col(b)).norm() <= 1e-9 * scale)
        throw ValidationError("gamma_mc: columns " + std::to_string(a) + " and " + std::to_string(b) +
                              " coincide");
}

Eigen::VectorXd ascending_eigs(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

}  // namespace

GammaBlocks gamma_mc(const LinearMap& a_star, long long samples, std::uint64_t seed) {
  if (samples < 1) throw ValidationError("gamma_mc: samples must be positive");
  const Eigen::MatrixXd& c = a_star.coeffs();
  const int d = static_cast<int>(c.rows());
  const int q = static_cast<int>(c.cols());
  if (q < 1) throw ValidationError("gamma_mc: empty map");
  check_distinct_columns(c);

  const long long chunks = (samples + kGammaChunk - 1) / kGammaChunk;
  std::vector<std::vector<Eigen::MatrixXd>> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(dynamic)
  for (long long ch = 0; ch < chunks; ++ch) {
    Rng rng(seed, kGammaStream + static_cast<std::uint64_t>(ch));
    std::vector<Eigen::MatrixXd> acc(static_cast<std::size_t>(q), Eigen::MatrixXd::Zero(d, d));
    const long long count = std::min(kGammaChunk, samples - ch * kGammaChunk);
    for (long long s = 0; s < count; ++s) {
      const Eigen::VectorXd u = rng.direction(d);
      Eigen::Index win = 0;
      (c.transpose() * u).maxCoeff(&win);
      acc[static_cast<std::size_t>(win)].noalias() += u * u.transpose();
    }
    partial[static_cast<std::size_t>(ch)] = std::move(acc);
  }

  GammaBlocks out;
  out.samples = samples;
  out.blocks.assign(static_cast<std::size_t>(q), Eigen::MatrixXd::Zero(d, d));
  for (const auto& acc : partial)
    for (int j = 0; j < q; ++j) out.blocks[static_cast<std::size_t>(j)] += acc[static_cast<std::size_t>(j)];
  for (int j = 0; j < q; ++j) {
    out.blocks[static_cast<std::size_t>(j)] /= static_cast<double>(samples);
    out.labels.push_back(j);
  }
  return out;
}

Eigen::Matrix2d qgon_block(int q, int k) {
  if (q < 3) throw ValidationError("qgon_block: q must be at least 3");
  if (k < 0 || k >= q) throw ValidationError("qgon_block: k must lie in [0, q)");
  const double pi = std::numbers::pi;
  const double s = std::sin(2.0 * pi / q) / (2.0 * pi);
  const double t = 4.0 * pi * k / q;
  Eigen::Matrix2d m;
  m << std::cos(t), std::sin(t), std::sin(t), -std::cos(t);
  return Eigen::Matrix2d::Identity() / q + s * m;
}

Eigen::MatrixXd linf_block(int d, const Eigen::VectorXd& v, VertexConvention conv) {
  if (d < 1 || d > 30) throw ValidationError("linf_block: d out of range");
  if (v.size() != d) throw ValidationError("linf_block: vertex has wrong dimension");
  for (Eigen::Index i = 0; i < d; ++i)
    if (std::abs(std::abs(v[i]) - 1.0) > 1e-12) throw ValidationError("linf_block: vertex entries must be +-1");
  const double pi = std::numbers::pi;
  const Eigen::VectorXd w = conv == VertexConvention::UnitNorm ? Eigen::VectorXd(v / std::sqrt(d)) : v;
  const double scale = 1.0 / (std::ldexp(1.0, d) * d);
  return scale * ((1.0 - 2.0 / pi) * Eigen::MatrixXd::Identity(d, d) + (2.0 / pi) * w * w.transpose());
}

Alignment align_simplex(const LinearMap& est, const LinearMap& target) {
  const Eigen::MatrixXd& a = est.coeffs();
  const Eigen::MatrixXd& b = target.coeffs();
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ValidationError("align_simplex: shape mismatch");
  const auto q = a.cols();
  Eigen::MatrixXd cost(q, q);
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index j = 0; j < q; ++j) cost(i, j) = (b.col(i) - a.col(j)).squaredNorm();
  Alignment out{LinearMap(a), solve_assignment(cost), 0.0};
  Eigen::MatrixXd aligned(a.rows(), q);
  for (Eigen::Index i = 0; i < q; ++i) aligned.col(i) = a.col(out.permutation[static_cast<std::size_t>(i)]);
  out.residual = (aligned - b).norm();
  out.aligned = LinearMap(std::move(aligned));
  return out;
}

CovarianceReport mc_vertex_covariance(const CovarianceConfig& cfg) {
  if (cfg.n < 1) throw ValidationError("stats-cov: n must be positive");
  if (cfg.trials < 2) throw ValidationError("stats-cov: at least 2 trials are required");
  if (!(cfg.sigma >= 0.0)) throw ValidationError("stats-cov: sigma must be non-negative");
  const auto truth = shape_realization(cfg.shape);
  if (!truth || truth->lift().kind() != LiftSpec::Kind::Simplex)
    throw ValidationError("stats-cov: shape " + cfg.shape.to_string() + " has no simplex realization");
  const LiftSpec lift = truth->lift();
  const Eigen::MatrixXd& a_star = truth->map().coeffs();
  const int d = static_cast<int>(a_star.rows());
  const int q = static_cast<int>(a_star.cols());

  FitConfig fit_cfg = cfg.fit;
  fit_cfg.starts = 1;
  if (cfg.init_at_truth) fit_cfg.init = ExplicitInit{truth->map()};
  fit_cfg.validate();

  std::vector<Eigen::VectorXd> devs(static_cast<std::size_t>(cfg.trials));
  std::vector<double> objectives(static_cast<std::size_t>(cfg.trials), std::numeric_limits<double>::infinity());
  std::vector<char> failed(static_cast<std::size_t>(cfg.trials), 0);
  const double root_n = std::sqrt(static_cast<double>(cfg.n));
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < cfg.trials; ++t) {
    const auto idx = static_cast<std::size_t>(t);
    try {
      const std::uint64_t key = stream_key(cfg.seed, kTrialStream + static_cast<std::uint64_t>(t));
      const Dataset ds = synth(cfg.shape, cfg.n, NoiseSpec{cfg.sigma}, key);
      FitConfig local = fit_cfg;
      local.seed = key;
      const FitResult r = fit_once(ds, lift, local);
      const Alignment al = align_simplex(r.estimate.map(), truth->map());
      Eigen::MatrixXd diff = (al.aligned.coeffs() - a_star) * root_n;
      devs[idx] = Eigen::Map<Eigen::VectorXd>(diff.data(), diff.size());
      objectives[idx] = r.objective;
    } catch (const std::exception&) {
      failed[idx] = 1;
    }
  }

  CovarianceReport rep;
  rep.shape = cfg.shape.to_string();
  rep.q = q;
  rep.n = cfg.n;
  rep.sigma = cfg.sigma;
  rep.trials = cfg.trials;
  rep.seed = cfg.seed;

  std::vector<double> finite;
  for (int t = 0; t < cfg.trials; ++t)
    if (!failed[static_cast<std::size_t>(t)]) finite.push_back(objectives[static_cast<std::size_t>(t)]);
  rep.objective_gate = std::max(cfg.gate_factor * median(finite), kGateFloor);
  std::vector<int> used;
  for (int t = 0; t < cfg.trials; ++t) {
    const auto idx = static_cast<std::size_t>(t);
    if (!failed[idx] && objectives[idx] <= rep.objective_gate) used.push_back(t);
  }
  rep.used = static_cast<int>(used.size());
  rep.excluded = cfg.trials - rep.used;
  rep.exclusion_fraction = static_cast<double>(rep.excluded) / cfg.trials;
  rep.valid = rep.exclusion_fraction <= cfg.max_exclusion && rep.used >= 2;
  if (rep.used < 2) return rep;

  const int dim = d * q;
  rep.deviations.resize(rep.used, dim);
  for (int r = 0; r < rep.used; ++r) rep.deviations.row(r) = devs[static_cast<std::size_t>(used[static_cast<std::size_t>(r)])].transpose();
  // Two-pass covariance in trial order.
  const Eigen::RowVectorXd mean = rep.deviations.colwise().mean();
  const Eigen::MatrixXd centered = rep.deviations.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / (rep.used - 1);

  std::vector<Eigen::MatrixXd> theory(static_cast<std::size_t>(q));
  if (cfg.shape.kind() == ShapeSpec::Kind::RegularGon) {
    for (int j = 0; j < q; ++j)
      theory[static_cast<std::size_t>(j)] = cfg.sigma * cfg.sigma * (qgon_block(q, j) / kQgonMeasureFactor).inverse();
    const double pi = std::numbers::pi;
    rep.qgon_radial_std = cfg.sigma * std::sqrt(static_cast<double>(q) / cfg.n);
    rep.qgon_tangential_std = cfg.sigma * std::sqrt(3.0 * q * q * q / (pi * pi * cfg.n));
  } else {
    const GammaBlocks g = gamma_mc(truth->map(), cfg.gamma_samples, cfg.seed);
    for (int j = 0; j < q; ++j)
      theory[static_cast<std::size_t>(j)] = cfg.sigma * cfg.sigma * g.blocks[static_cast<std::size_t>(j)].inverse();
  }

  const double se_factor = std::sqrt(2.0 / (rep.used - 1));
  for (int j = 0; j < q; ++j) {
    VertexCovariance vc;
    vc.vertex = a_star.col(j);
    vc.empirical = cov.block(j * d, j * d, d, d);
    vc.theory = theory[static_cast<std::size_t>(j)];
    vc.empirical_eigs = ascending_eigs(vc.empirical);
    vc.theory_eigs = ascending_eigs(vc.theory);
    vc.eig_rel_error = ((vc.empirical_eigs - vc.theory_eigs).array() / vc.theory_eigs.array()).abs().matrix();
    vc.eig_std_error = vc.empirical_eigs * se_factor;
    const Eigen::VectorXd r = vc.vertex.normalized();
    const Eigen::MatrixXd perp = Eigen::MatrixXd::Identity(d, d) - r * r.transpose();
    auto split = [&](const Eigen::MatrixXd& c, double& radial, double& tangential) {
      radial = std::sqrt(r.dot(c * r) / cfg.n);
      tangential = d > 1 ? std::sqrt((perp * c * perp).trace() / (d - 1) / cfg.n) : 0.0;
    };
    split(vc.empirical, vc.radial_std, vc.tangential_std);
    split(vc.theory, vc.theory_radial_std, vc.theory_tangential_std);
    rep.vertices.push_back(std::move(vc));
  }

  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      if (a / d == b / d) continue;
      const double denom = std::sqrt(cov(a, a) * cov(b, b));
      if (denom > 0.0) rep.max_cross_correlation = std::max(rep.max_cross_correlation, std::abs(cov(a, b)) / denom);
    }
  return rep;
}

}  // namespace spectrafit
