#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace spectrafit {

/// SplitMix64 finalizer; used to derive independent stream keys.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Key of the stream `stream` under master `seed`. Every consumer of
/// randomness addresses its stream by (seed, stream id) so the values it
/// sees do not depend on thread scheduling.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(mix64(seed) ^ mix64(stream + 0x632BE59BD9B4E019ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(stream_key(seed, stream)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

  /// Uniform direction on S^{d-1} via a normalized Gaussian draw.
  Eigen::VectorXd direction(int d) {
    Eigen::VectorXd u(d);
    double norm = 0.0;
    do {
      for (int k = 0; k < d; ++k) u[k] = normal();
      norm = u.norm();
    } while (norm < 1e-300);
    return u / norm;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace spectrafit
