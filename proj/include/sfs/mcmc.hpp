#pragma once

// Random-walk Metropolis. Used both to sample the tilted measure
// pi_{x,t}(z) ~ f(x + sqrt(1-t) z) phi(z) inside the MCMC drift, and to
// compute reference posterior means for models without an analytic one.

#include <cstddef>
#include <functional>
#include <span>

#include "sfs/common.hpp"
#include "sfs/model.hpp"
#include "sfs/rng.hpp"

namespace sfs {

struct McmcConfig {
  double step_size = 0.5;  // proposal standard deviation
  std::size_t n_samples = 1000;
  std::size_t burn_in = 1000;
  std::size_t thin = 1;

  void validate() const;
  bool operator==(const McmcConfig&) const = default;
};

// Row-major n x dim matrix of states.
struct SampleMatrix {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
  [[nodiscard]] Vec mean() const;
};

struct ChainResult {
  SampleMatrix samples;
  double acceptance_rate = 0.0;
};

// log f(x + sqrt(1-t) z) - |z|^2 / 2, up to a constant.
[[nodiscard]] double log_density_pi_xt(const TargetModel& model, std::span<const double> x, double t,
                                       std::span<const double> z);

[[nodiscard]] ChainResult rwm_chain(RngStream& stream, const LogDensityFn& log_density,
                                    std::span<const double> x0, const McmcConfig& cfg);

// Short pilot runs that scale the proposal towards a target acceptance rate.
[[nodiscard]] double tune_step_size(RngStream stream, const LogDensityFn& log_density,
                                    std::span<const double> x0, double target_acceptance = 0.3,
                                    double initial_step = 1.0);

struct PosteriorMean {
  Vec mean;
  Vec standard_error;
};

// Averages independent chains on log pi = log f + log phi; the standard error is
// the spread of per-chain means.
[[nodiscard]] PosteriorMean reference_posterior_mean(const RngStream& stream, const TargetModel& model,
                                                     const McmcConfig& cfg, std::size_t n_chains,
                                                     int jobs = 1);

}  // namespace sfs
