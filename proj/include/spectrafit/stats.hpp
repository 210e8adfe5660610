#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectrafit/fit.hpp"
#include "spectrafit/shapes.hpp"

namespace spectrafit {

/// Per-vertex blocks of the Hessian operator for a polytope A*(simplex):
/// blocks[j] = E[u u^T 1{u in H_j}] under the normalized uniform measure,
/// where H_j is the open normal cone of column j.
struct GammaBlocks {
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<int> labels;
  long long samples = 0;
};

/// Monte-Carlo estimate of the blocks from `samples` uniform directions.
/// Deterministic in (a_star, samples, seed) regardless of thread count.
GammaBlocks gamma_mc(const LinearMap& a_star, long long samples, std::uint64_t seed);

/// The closed-form blocks below carry the normalization of their source:
/// the q-gon block integrates to trace 2/q, twice the normalized-measure
/// block; the l-infinity block with +-1 vertices equals it. Multiply a
/// gamma_mc block by these factors to compare.
inline constexpr double kQgonMeasureFactor = 2.0;
inline constexpr double kLinfMeasureFactor = 1.0;

/// M_kk = I/q + sin(2pi/q)/(2pi) [[cos 4pi k/q, sin 4pi k/q], [sin 4pi k/q, -cos 4pi k/q]].
Eigen::Matrix2d qgon_block(int q, int k);

enum class VertexConvention { PlusMinusOne, UnitNorm };

/// M_vv = ((1 - 2/pi) I + (2/pi) v v^T) / (2^d d) for a vertex v of the
/// l-infinity ball, given with +-1 entries. UnitNorm evaluates the formula
/// at v / sqrt(d) instead.
Eigen::MatrixXd linf_block(int d, const Eigen::VectorXd& v,
                           VertexConvention conv = VertexConvention::PlusMinusOne);

struct Alignment {
  LinearMap aligned;
  std::vector<int> permutation;  // aligned column i is input column permutation[i]
  double residual = 0.0;         // Frobenius distance to the target
};

/// Column permutation of `est` closest to `target` in Frobenius norm, i.e.
/// the nearest point of est's orbit under the simplex automorphisms.
Alignment align_simplex(const LinearMap& est, const LinearMap& target);

struct VertexCovariance {
  Eigen::VectorXd vertex;
  Eigen::MatrixXd empirical;  // covariance of sqrt(n) (vhat - v)
  Eigen::MatrixXd theory;     // sigma^2 Gamma_j^{-1} in the normalized measure
  Eigen::VectorXd empirical_eigs;  // ascending
  Eigen::VectorXd theory_eigs;     // ascending
  Eigen::VectorXd eig_rel_error;
  Eigen::VectorXd eig_std_error;   // lambda sqrt(2 / (trials - 1))
  // Standard deviations of vhat - v along v and across it (mean over the
  // orthogonal complement when d > 2).
  double radial_std = 0.0;
  double tangential_std = 0.0;
  double theory_radial_std = 0.0;
  double theory_tangential_std = 0.0;
};

struct CovarianceConfig {
  ShapeSpec shape = ShapeSpec::regular_gon(5);
  int n = 4000;
  double sigma = 0.1;
  int trials = 300;
  std::uint64_t seed = 0;
  FitConfig fit;
  bool init_at_truth = true;  // start every fit at A* instead of fit.init
  long long gamma_samples = 2'000'000;  // only for shapes without a closed form
  double gate_factor = 5.0;
  double max_exclusion = 0.1;
};

struct CovarianceReport {
  std::string shape;
  int q = 0;
  int n = 0;
  double sigma = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
  int used = 0;
  int excluded = 0;
  double exclusion_fraction = 0.0;
  double objective_gate = 0.0;
  bool valid = false;
  std::vector<VertexCovariance> vertices;
  double max_cross_correlation = 0.0;  // between coordinates of distinct vertices
  // sigma sqrt(q/n) and sigma sqrt(3 q^3 / (pi^2 n)), set for q-gons only.
  std::optional<double> qgon_radial_std;
  std::optional<double> qgon_tangential_std;
  /// One row per used trial: sqrt(n) deviations, vertex-major.
  Eigen::MatrixXd deviations;
};

/// Repeated fits of A*(simplex) to fresh noisy samples of `shape`, aligned
/// to A*, compared with the asymptotic covariance sigma^2 Gamma_j^{-1}.
/// Trials whose objective exceeds gate_factor times the median are
/// excluded and counted; more than max_exclusion of them invalidates the
/// report.
CovarianceReport mc_vertex_covariance(const CovarianceConfig& cfg);

}  // namespace spectrafit
