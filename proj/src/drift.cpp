#include "sfs/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sfs {
namespace {

void check_time(double t, const char* who) {
  if (!(t >= 0.0 && t < 1.0)) {
    throw std::invalid_argument(std::string(who) + ": t must lie in [0, 1), got " + std::to_string(t));
  }
}

// In-place softmax of log-weights; returns the effective sample size.
double normalize_log_weights(std::span<double> log_w) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : log_w) {
    if (std::isnan(v)) throw NumericalError("degenerate drift weights: NaN log-weight");
    top = std::max(top, v);
  }
  if (top == -std::numeric_limits<double>::infinity()) {
    throw NumericalError("degenerate drift weights: every log-weight is -inf");
  }
  if (top == std::numeric_limits<double>::infinity()) {
    throw NumericalError("degenerate drift weights: +inf log-weight");
  }
  double sum = 0.0;
  for (double& v : log_w) {
    v = std::exp(v - top);
    sum += v;
  }
  double sum_sq = 0.0;
  for (double& v : log_w) {
    v /= sum;
    sum_sq += v * v;
  }
  return 1.0 / sum_sq;
}

}  // namespace

std::string_view to_string(DriftForm form) {
  switch (form) {
    case DriftForm::Grad:
      return "grad";
    case DriftForm::ZScore:
      return "zscore";
  }
  return "grad";
}

DriftForm parse_drift_form(std::string_view s) {
  if (s == "grad") return DriftForm::Grad;
  if (s == "zscore") return DriftForm::ZScore;
  throw std::invalid_argument("unknown drift form '" + std::string(s) + "' (expected grad | zscore)");
}

PoolDrift::PoolDrift(const GaussianPool& pool, const TargetModel& model, DriftForm form)
    : pool_(&pool), model_(&model), form_(form) {
  if (pool.dim() != model.dim) {
    throw std::invalid_argument("PoolDrift: pool dimension " + std::to_string(pool.dim()) +
                                " does not match model dimension " + std::to_string(model.dim));
  }
}

void PoolDrift::operator()(std::span<const double> x, double t, std::span<double> out) {
  check_time(t, "drift_pool");
  const std::size_t n = pool_->size();
  const std::size_t d = pool_->dim();
  const double scale = std::sqrt(1.0 - t);
  log_w_.resize(n);
  y_.resize(d);
  if (form_ == DriftForm::Grad) grads_.resize(n * d);

  for (std::size_t i = 0; i < n; ++i) {
    const auto z = pool_->row(i);
    for (std::size_t j = 0; j < d; ++j) y_[j] = x[j] + scale * z[j];
    if (form_ == DriftForm::Grad) {
      log_w_[i] = model_->log_f_and_grad(y_, std::span<double>(grads_.data() + i * d, d));
    } else {
      log_w_[i] = model_->log_f(y_);
    }
  }
  normalize_log_weights(log_w_);

  std::fill(out.begin(), out.end(), 0.0);
  if (form_ == DriftForm::Grad) {
    for (std::size_t i = 0; i < n; ++i) {
      const double w = log_w_[i];
      for (std::size_t j = 0; j < d; ++j) out[j] += w * grads_[i * d + j];
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double w = log_w_[i];
      const auto z = pool_->row(i);
      for (std::size_t j = 0; j < d; ++j) out[j] += w * z[j];
    }
    for (double& v : out) v /= scale;
  }
}

Vec drift_pool(const GaussianPool& pool, std::span<const double> x, double t, const TargetModel& model,
               DriftForm form) {
  PoolDrift drift(pool, model, form);
  Vec out(model.dim);
  drift(x, t, out);
  return out;
}

IsDrift drift_is(const SampleMatrix& samples, std::span<const double> x, std::span<const double> x_tilde,
                 double t, const TargetModel& model) {
  return drift_is(samples, x, x_tilde, t, t, model);
}

IsDrift drift_is(const SampleMatrix& samples, std::span<const double> x, std::span<const double> x_tilde,
                 double t, double t_proposal, const TargetModel& model) {
  check_time(t, "drift_is");
  check_time(t_proposal, "drift_is");
  if (samples.n == 0) throw std::invalid_argument("drift_is: empty sample set");
  const std::size_t d = samples.dim;
  const double scale = std::sqrt(1.0 - t);
  const double scale_prop = std::sqrt(1.0 - t_proposal);
  Vec log_w(samples.n);
  Vec y(d);
  Vec y_tilde(d);
  for (std::size_t i = 0; i < samples.n; ++i) {
    const auto z = samples.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      y[j] = x[j] + scale * z[j];
      y_tilde[j] = x_tilde[j] + scale_prop * z[j];
    }
    log_w[i] = model.log_f(y) - model.log_f(y_tilde);
  }
  IsDrift out;
  out.effective_sample_size = normalize_log_weights(log_w);
  out.value.assign(d, 0.0);
  for (std::size_t i = 0; i < samples.n; ++i) {
    const auto z = samples.row(i);
    for (std::size_t j = 0; j < d; ++j) out.value[j] += log_w[i] * z[j];
  }
  for (double& v : out.value) v /= scale;
  return out;
}

McmcDrift drift_mcmc(RngStream& stream, std::span<const double> x, double t, const TargetModel& model,
                     std::size_t n, const McmcConfig& cfg) {
  check_time(t, "drift_mcmc");
  if (n == 0) throw std::invalid_argument("drift_mcmc: n must be >= 1");
  const std::size_t d = model.dim;
  const double scale = std::sqrt(1.0 - t);
  Vec anchor(x.begin(), x.end());
  Vec y(d);
  const LogDensityFn log_density = [&](std::span<const double> z) {
    for (std::size_t j = 0; j < d; ++j) y[j] = anchor[j] + scale * z[j];
    return model.log_f(y) - 0.5 * squared_norm(z);
  };
  McmcConfig chain_cfg = cfg;
  chain_cfg.n_samples = n;
  const Vec z0(d, 0.0);
  auto chain = rwm_chain(stream, log_density, z0, chain_cfg);
  McmcDrift out;
  out.value = chain.samples.mean();
  for (double& v : out.value) v /= scale;
  out.samples = std::move(chain.samples);
  out.acceptance_rate = chain.acceptance_rate;
  return out;
}

}  // namespace sfs
