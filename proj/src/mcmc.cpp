#include "sfs/mcmc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "sfs/parallel.hpp"

namespace sfs {

void McmcConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw std::invalid_argument("McmcConfig: step_size must be positive");
  }
  if (n_samples < 1) throw std::invalid_argument("McmcConfig: n_samples must be >= 1");
  if (thin < 1) throw std::invalid_argument("McmcConfig: thin must be >= 1");
}

Vec SampleMatrix::mean() const {
  Vec m(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) m[j] += values[i * dim + j];
  }
  for (double& v : m) v /= static_cast<double>(n);
  return m;
}

double log_density_pi_xt(const TargetModel& model, std::span<const double> x, double t,
                         std::span<const double> z) {
  if (!(t < 1.0)) throw std::invalid_argument("log_density_pi_xt: t must be < 1");
  const double scale = std::sqrt(1.0 - t);
  Vec y(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) y[j] = x[j] + scale * z[j];
  return model.log_f(y) - 0.5 * squared_norm(z);
}

ChainResult rwm_chain(RngStream& stream, const LogDensityFn& log_density, std::span<const double> x0,
                      const McmcConfig& cfg) {
  cfg.validate();
  const std::size_t d = x0.size();
  Vec current(x0.begin(), x0.end());
  double current_lp = log_density(current);
  if (!std::isfinite(current_lp)) {
    throw NumericalError("rwm_chain: log density is not finite at the initial state");
  }
  Vec proposal(d);
  ChainResult result;
  result.samples.n = cfg.n_samples;
  result.samples.dim = d;
  result.samples.values.reserve(cfg.n_samples * d);

  const std::size_t total = cfg.burn_in + cfg.n_samples * cfg.thin;
  std::size_t accepted = 0;
  for (std::size_t it = 0; it < total; ++it) {
    for (std::size_t j = 0; j < d; ++j) proposal[j] = current[j] + cfg.step_size * stream.normal();
    double lp = log_density(proposal);
    if (std::isnan(lp)) lp = -std::numeric_limits<double>::infinity();
    const double log_u = std::log(stream.uniform_open());
    if (log_u < lp - current_lp) {
      current.swap(proposal);
      current_lp = lp;
      ++accepted;
    }
    if (it >= cfg.burn_in && (it - cfg.burn_in + 1) % cfg.thin == 0) {
      result.samples.values.insert(result.samples.values.end(), current.begin(), current.end());
    }
  }
  result.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(total);
  return result;
}

double tune_step_size(RngStream stream, const LogDensityFn& log_density, std::span<const double> x0,
                      double target_acceptance, double initial_step) {
  McmcConfig pilot;
  pilot.step_size = initial_step;
  pilot.burn_in = 0;
  pilot.n_samples = 500;
  Vec start(x0.begin(), x0.end());
  for (int round = 0; round < 20; ++round) {
    const auto chain = rwm_chain(stream, log_density, start, pilot);
    start.assign(chain.samples.row(chain.samples.n - 1).begin(), chain.samples.row(chain.samples.n - 1).end());
    pilot.step_size *= std::exp(2.0 * (chain.acceptance_rate - target_acceptance));
  }
  return pilot.step_size;
}

PosteriorMean reference_posterior_mean(const RngStream& stream, const TargetModel& model,
                                       const McmcConfig& cfg, std::size_t n_chains, int jobs) {
  if (n_chains < 2) throw std::invalid_argument("reference_posterior_mean: need at least 2 chains");
  cfg.validate();
  const std::size_t d = model.dim;
  std::vector<Vec> chain_means(n_chains);
  const LogDensityFn log_pi = [&model](std::span<const double> x) { return model.log_target(x); };
  parallel_for(n_chains, jobs, [&](std::size_t c) {
    RngStream s = stream.substream(c, "chain");
    const Vec x0(d, 0.0);
    chain_means[c] = rwm_chain(s, log_pi, x0, cfg).samples.mean();
  });
  PosteriorMean out;
  out.mean.assign(d, 0.0);
  out.standard_error.assign(d, 0.0);
  for (const auto& m : chain_means) {
    for (std::size_t j = 0; j < d; ++j) out.mean[j] += m[j];
  }
  const auto k = static_cast<double>(n_chains);
  for (double& v : out.mean) v /= k;
  for (const auto& m : chain_means) {
    for (std::size_t j = 0; j < d; ++j) {
      const double u = m[j] - out.mean[j];
      out.standard_error[j] += u * u;
    }
  }
  for (double& v : out.standard_error) v = std::sqrt(v / (k - 1.0) / k);
  return out;
}

}  // namespace sfs
