#pragma once

// Top-level estimators of pi(phi) with cost accounting in abstract units
// (one unit per drift sample per Euler step).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sfs/common.hpp"
#include "sfs/drift.hpp"
#include "sfs/mcmc.hpp"
#include "sfs/model.hpp"
#include "sfs/randomizer.hpp"
#include "sfs/rng.hpp"

namespace sfs {

struct RandomizedEstimate {
  Vec value;
  int level = 0;
  int precision = 0;  // -1 for estimators without a sampled precision
  std::uint64_t cost_units = 0;
};

struct EstimateReport {
  Vec mean;
  Vec standard_error;
  std::vector<RandomizedEstimate> replicates;
  std::uint64_t total_cost_units = 0;
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::size_t degenerate_weights = 0;
};

// Closed-form costs.
[[nodiscard]] std::uint64_t cost_single(std::uint64_t n, std::uint64_t m, int level);
// N_l = (l_target - l_start + 1) 2^{2 l_target - l}.
[[nodiscard]] std::uint64_t ml_pool_size(int l_start, int l_target, int l);
[[nodiscard]] std::uint64_t cost_ml(int l_start, int l_target, std::uint64_t m);
[[nodiscard]] std::uint64_t cost_replicate(int level, int precision, bool at_min_level,
                                           bool at_min_precision, std::uint64_t n0, int l_min);

struct RunOptions {
  int jobs = 1;
  DriftForm form = DriftForm::Grad;
  bool independent_subpool = false;
};

// Single level, pool of n Gaussians, m replicates. Replicate i draws from
// RngStream(seed).substream(i, "replicate").
[[nodiscard]] EstimateReport sfs_biased(const TargetModel& model, int level, std::size_t n, std::size_t m,
                                        const Phi& phi, bool fixed_pool, std::uint64_t seed,
                                        const RunOptions& options = {});

// Telescoping sum over levels l_start..l_target, each difference with its own
// fixed pool of N_l Gaussians.
[[nodiscard]] EstimateReport sfs_multilevel(const TargetModel& model, int l_start, int l_target,
                                            std::size_t m, const Phi& phi, std::uint64_t seed,
                                            const RunOptions& options = {});

// Randomized single-term estimator over (L, P).
[[nodiscard]] EstimateReport sfs_unbiased(const TargetModel& model, const LevelDistribution& levels,
                                          const PrecisionDistribution& precisions, std::size_t m,
                                          const Phi& phi, std::uint64_t seed,
                                          const RunOptions& options = {});

// Randomized single-term estimator built on the MCMC / importance-sampling coupling.
[[nodiscard]] EstimateReport sfs_unbiased_alt(const TargetModel& model, const LevelDistribution& levels,
                                              const PrecisionDistribution& precisions, std::size_t m,
                                              const Phi& phi, const McmcConfig& mcmc, std::uint64_t seed,
                                              const RunOptions& options = {});

enum class EstimatorKind { Single, Multilevel, Unbiased, UnbiasedAlt };

[[nodiscard]] std::string to_string(EstimatorKind kind);
[[nodiscard]] EstimatorKind parse_estimator_kind(std::string_view s);

// Everything needed to run one estimator instance.
struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::Unbiased;
  std::size_t m = 1000;
  // single
  int level = 4;
  std::size_t n = 64;
  bool fixed_pool = true;
  // multilevel
  int l_start = 1;
  int l_target = 4;
  // unbiased / unbiased-alt
  RandomizationParams randomization{2, 8, 1, 6, 10};
  double level_exponent = 1.5;
  bool cap_precision_by_level = false;
  bool independent_subpool = false;
  std::optional<McmcConfig> mcmc;
  DriftForm form = DriftForm::Grad;

  [[nodiscard]] std::string summary() const;
  bool operator==(const EstimatorSpec&) const = default;
};

[[nodiscard]] EstimateReport run_estimator(const TargetModel& model, const EstimatorSpec& spec,
                                           const Phi& phi, std::uint64_t seed, int jobs = 1);

// Per-replicate CSV: replicate,L,P,cost_units,value_0..value_{d-1}, preceded
// by `header` lines as '#' comments.
void write_replicates_csv(std::ostream& out, const EstimateReport& report, const std::vector<std::string>& header);

}  // namespace sfs
