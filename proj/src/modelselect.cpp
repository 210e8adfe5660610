#include "spectrafit/modelselect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spectrafit/error.hpp"
#include "spectrafit/random.hpp"

namespace spectrafit {

namespace {
constexpr std::uint64_t kPartitionStream = 0xC0000000ULL;
constexpr std::uint64_t kCvFitStream = 0xC1000000ULL;
}  // namespace

std::vector<int> cv_partition(int n, std::uint64_t seed, int p) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed, kPartitionStream + static_cast<std::uint64_t>(p));
  for (int i = n - 1; i > 0; --i) {
    const int j = std::min(i, static_cast<int>(rng.uniform() * (i + 1)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

CvCurve cross_validate(const Dataset& ds, const std::vector<LiftSpec>& lifts, int partitions,
                       const FitConfig& cfg, std::uint64_t seed) {
  ds.validate();
  cfg.validate();
  if (lifts.empty()) throw ValidationError("cross_validate: no candidate lifts");
  if (partitions < 1) throw ValidationError("cross_validate: partitions must be positive");
  const int n = ds.size();
  const int half = n / 2;
  if (half < 1) throw ValidationError("cross_validate: need at least 2 records");

  const auto nl = static_cast<int>(lifts.size());
  CvCurve curve;
  curve.lifts = lifts;
  curve.partitions = partitions;
  curve.seed = seed;
  curve.partition_mse = Eigen::MatrixXd::Constant(nl, partitions, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> cell_error(static_cast<std::size_t>(nl * partitions));

  std::vector<Dataset> train(static_cast<std::size_t>(partitions)), test(static_cast<std::size_t>(partitions));
  for (int p = 0; p < partitions; ++p) {
    const auto perm = cv_partition(n, seed, p);
    std::vector<int> a(perm.begin(), perm.begin() + half), b(perm.begin() + half, perm.begin() + 2 * half);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    train[static_cast<std::size_t>(p)] = subset(ds, a);
    test[static_cast<std::size_t>(p)] = subset(ds, b);
  }

#pragma omp parallel for schedule(dynamic)
  for (int cell = 0; cell < nl * partitions; ++cell) {
    const int l = cell / partitions;
    const int p = cell % partitions;
    try {
      FitConfig local = cfg;
      local.seed = stream_key(seed, kCvFitStream + static_cast<std::uint64_t>(p));
      const FitResult r =
          fit_all(train[static_cast<std::size_t>(p)], lifts[static_cast<std::size_t>(l)], local, kernels::Exec::Serial)
              .best;
      curve.partition_mse(l, p) = objective(r.estimate, test[static_cast<std::size_t>(p)]);
    } catch (const std::exception& e) {
      cell_error[static_cast<std::size_t>(cell)] = e.what();
    }
  }

  curve.mean.assign(static_cast<std::size_t>(nl), std::numeric_limits<double>::quiet_NaN());
  curve.failures.assign(static_cast<std::size_t>(nl), 0);
  curve.errors.assign(static_cast<std::size_t>(nl), {});
  for (int l = 0; l < nl; ++l) {
    double sum = 0.0;
    int ok = 0;
    for (int p = 0; p < partitions; ++p) {
      const double v = curve.partition_mse(l, p);
      if (std::isnan(v)) {
        auto& msg = curve.errors[static_cast<std::size_t>(l)];
        if (msg.empty()) msg = cell_error[static_cast<std::size_t>(l * partitions + p)];
        ++curve.failures[static_cast<std::size_t>(l)];
      } else {
        sum += v;
        ++ok;
      }
    }
    if (ok > 0) curve.mean[static_cast<std::size_t>(l)] = sum / ok;
  }
  return curve;
}

LiftSpec select_knee(const CvCurve& curve, double slack) {
  if (curve.lifts.empty() || curve.mean.size() != curve.lifts.size()) throw ValidationError("select_knee: empty curve");
  if (!(slack >= 0.0)) throw ValidationError("select_knee: slack must be non-negative");
  double best = std::numeric_limits<double>::infinity();
  for (double m : curve.mean)
    if (!std::isnan(m)) best = std::min(best, m);
  if (!std::isfinite(best)) throw ValidationError("select_knee: every candidate failed");
  std::vector<std::size_t> order(curve.lifts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return curve.lifts[a].lifted_dim() < curve.lifts[b].lifted_dim();
  });
  for (std::size_t i : order)
    if (!std::isnan(curve.mean[i]) && curve.mean[i] <= (1.0 + slack) * best) return curve.lifts[i];
  return curve.lifts[order.front()];
}

}  // namespace spectrafit
