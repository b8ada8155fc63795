#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfs {

using Vec = std::vector<double>;

// Test function applied to a terminal state. The default is the identity map.
using Phi = std::function<Vec(std::span<const double>)>;

[[nodiscard]] Phi identity_phi();
[[nodiscard]] Phi constant_phi(double c);

// Raised when a simulation produces non-finite values or degenerate weights.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by config parsing and validation; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

[[nodiscard]] inline double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

[[nodiscard]] bool all_finite(std::span<const double> v);

}  // namespace sfs
