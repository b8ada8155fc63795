#pragma once

// Monte Carlo estimators of the Schrodinger-Follmer drift
//   b(x, t) = grad log E_phi[ f(x + sqrt(1-t) Z) ].
// All weights are softmax-normalized log-weights.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "sfs/common.hpp"
#include "sfs/mcmc.hpp"
#include "sfs/model.hpp"
#include "sfs/rng.hpp"

namespace sfs {

enum class DriftForm {
  // sum_i w_i grad log f(x + sqrt(1-t) Z^i), w = softmax(log f(x + sqrt(1-t) Z^i))
  Grad,
  // (1/sqrt(1-t)) sum_i w_i Z^i with the same weights
  ZScore,
};

[[nodiscard]] std::string_view to_string(DriftForm form);
[[nodiscard]] DriftForm parse_drift_form(std::string_view s);

// Pool-based drift bound to one pool and model, with reusable scratch space.
// Not thread-safe; use one instance per replicate.
class PoolDrift {
 public:
  PoolDrift(const GaussianPool& pool, const TargetModel& model, DriftForm form);

  void operator()(std::span<const double> x, double t, std::span<double> out);

  // Swap in a different pool of the same dimension (used when the pool is
  // refreshed at every time step).
  void rebind(const GaussianPool& pool) { pool_ = &pool; }

 private:
  const GaussianPool* pool_;
  const TargetModel* model_;
  DriftForm form_;
  Vec log_w_;
  Vec grads_;
  Vec y_;
};

[[nodiscard]] Vec drift_pool(const GaussianPool& pool, std::span<const double> x, double t,
                             const TargetModel& model, DriftForm form = DriftForm::Grad);

struct IsDrift {
  Vec value;
  double effective_sample_size = 0.0;
  [[nodiscard]] bool degenerate() const { return effective_sample_size < 2.0; }
};

// Self-normalized importance-sampling drift at (x, t) reusing samples drawn
// from pi_{x_tilde, t_proposal}. By default t_proposal = t.
[[nodiscard]] IsDrift drift_is(const SampleMatrix& samples, std::span<const double> x,
                               std::span<const double> x_tilde, double t, const TargetModel& model);
[[nodiscard]] IsDrift drift_is(const SampleMatrix& samples, std::span<const double> x,
                               std::span<const double> x_tilde, double t, double t_proposal,
                               const TargetModel& model);

struct McmcDrift {
  Vec value;
  SampleMatrix samples;
  double acceptance_rate = 0.0;
};

// Runs a chain on pi_{x,t} started at z = 0 and returns mean(Z) / sqrt(1-t).
[[nodiscard]] McmcDrift drift_mcmc(RngStream& stream, std::span<const double> x, double t,
                                   const TargetModel& model, std::size_t n, const McmcConfig& cfg);

}  // namespace sfs
