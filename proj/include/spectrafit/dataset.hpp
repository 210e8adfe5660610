#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectrafit/shapes.hpp"

namespace spectrafit {

inline constexpr double kTauUnit = 1e-6;

struct Measurement {
  Eigen::VectorXd u;
  double y = 0.0;
};

struct DatasetMeta {
  std::optional<double> sigma;
  std::optional<std::uint64_t> seed;
  std::string shape;
  bool operator==(const DatasetMeta&) const = default;
};

/// n support-function evaluations in R^d. Directions are stored as the
/// columns of `u`.
struct Dataset {
  Eigen::MatrixXd u;
  Eigen::VectorXd y;
  DatasetMeta meta;

  int dim() const { return static_cast<int>(u.rows()); }
  int size() const { return static_cast<int>(u.cols()); }
  Measurement measurement(int i) const { return {u.col(i), y[i]}; }

  /// Throws ValidationError unless n >= 1, shapes agree and every direction
  /// has unit norm within `tau_unit`.
  void validate(double tau_unit = kTauUnit) const;
};

/// Additive noise law. Only Gaussian noise is implemented; the measurement
/// model admits any centered law with finite variance.
struct NoiseSpec {
  double sigma = 0.0;
};

/// n i.i.d. records: u uniform on the sphere, y = h_K(u) + N(0, sigma^2).
/// A pure function of its arguments.
Dataset synth(const ShapeSpec& shape, int n, const NoiseSpec& noise, std::uint64_t seed);

/// Noiseless evaluations at explicit unit directions (columns).
Dataset synth_grid(const ShapeSpec& shape, const Eigen::MatrixXd& directions);

/// Records `idx` of `ds`, in that order.
Dataset subset(const Dataset& ds, const std::vector<int>& idx);

/// CSV with header u1,...,ud,y; metadata travels in leading "# key=value"
/// comment lines. Values are written with 17 significant digits.
void write_csv(const Dataset& ds, const std::string& path);
std::string to_csv(const Dataset& ds);
Dataset read_csv(const std::string& path);
Dataset parse_csv(const std::string& text, const std::string& source = "<string>");

}  // namespace spectrafit
