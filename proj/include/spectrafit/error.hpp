#pragma once

#include <stdexcept>
#include <string>

namespace spectrafit {

/// Bad input: wrong dimension, out-of-range parameter, malformed file.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace spectrafit
