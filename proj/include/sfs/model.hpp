#pragma once

// Target densities, described through the log of the likelihood ratio
// f = pi / phi against the standard Gaussian phi. Everything is kept in
// log-space; f itself is never formed.

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfs/common.hpp"
#include "sfs/rng.hpp"

namespace sfs {

using LogDensityFn = std::function<double(std::span<const double>)>;
using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;
// Writes b(x, t) into the output span.
using DriftFn = std::function<void(std::span<const double>, double, std::span<double>)>;

struct TargetModel {
  std::string name;
  // Canonical parameter string; two models with equal descriptors are equal.
  std::string descriptor;
  std::size_t dim = 0;
  LogDensityFn log_f;
  GradientFn grad_log_f;
  std::optional<Vec> reference_mean;
  std::optional<DriftFn> exact_drift;

  // log f(x) and its gradient in one call.
  double log_f_and_grad(std::span<const double> x, std::span<double> grad) const {
    grad_log_f(x, grad);
    return log_f(x);
  }
  // log pi(x) up to a constant: log f(x) + log phi(x).
  [[nodiscard]] double log_target(std::span<const double> x) const {
    return log_f(x) - 0.5 * squared_norm(x);
  }
  [[nodiscard]] std::uint64_t hash() const;
};

struct LogisticData {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> covariates;  // n x d, row-major
  std::vector<int> responses;      // n values in {0, 1}
  std::vector<double> prior_precision;  // d x d, equals (1/n) X^T X

  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {covariates.data() + i * d, d};
  }
};

// N(mean, variance) in one dimension; exact drift available in closed form.
[[nodiscard]] TargetModel gaussian1d(double mean, double variance);

// Equal-weight mixture of isotropic 2D Gaussians.
[[nodiscard]] TargetModel gaussian_mixture_2d(const std::vector<std::array<double, 2>>& means,
                                              double component_variance);
// The 4x4 grid {-1,-0.5,0.5,1}^2 of component means.
[[nodiscard]] std::vector<std::array<double, 2>> default_mixture_means();

[[nodiscard]] TargetModel logistic_regression(const LogisticData& data);

// pi(x) proportional to exp(-|x|^4/4 + |x|^2/2).
[[nodiscard]] TargetModel double_well(std::size_t dim);

[[nodiscard]] LogisticData generate_logistic_data(RngStream stream, std::size_t n, std::size_t d,
                                                  std::span<const double> beta_true);

// Rebuilds prior_precision from the covariates and validates the data.
void finalize_logistic_data(LogisticData& data);

// One row per observation: d covariate columns, then the response.
void write_logistic_csv(std::ostream& out, const LogisticData& data);
[[nodiscard]] LogisticData read_logistic_csv(std::istream& in);

// Closed-form drift for N(mean, variance) targets.
void gaussian1d_drift(double mean, double variance, double x, double t, double& out);

}  // namespace sfs
