#pragma once

// Experiment harness: MSE against cost, level-difference variance decay and
// coupling rates, plus log-log regression helpers.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sfs/common.hpp"
#include "sfs/estimators.hpp"
#include "sfs/model.hpp"

namespace sfs {

struct BenchRow {
  std::string tag;
  std::string summary;
  std::size_t repetitions = 0;
  // (1/R) sum_j ||est_j - ref||^2
  double mse = 0.0;
  double mean_cost_units = 0.0;
  double cost_p50 = 0.0;
  double cost_p90 = 0.0;
  double cost_p99 = 0.0;
  std::uint64_t seed = 0;
  // max over coordinates of |mean_j est_j - ref| / s.e.
  double bias_z = 0.0;
};

// Seed of estimator instance (grid point g, repetition r).
[[nodiscard]] std::uint64_t bench_seed(std::uint64_t seed, std::size_t g, std::size_t r);

[[nodiscard]] std::vector<BenchRow> mse_vs_cost(const TargetModel& model, const std::vector<EstimatorSpec>& grid,
                                                std::size_t repetitions, const Vec& reference, const Phi& phi,
                                                std::uint64_t seed, int jobs = 1);

struct VarianceRow {
  int level = 0;
  double variance = 0.0;
  double log2_variance = 0.0;
};

// Var(phi(fine) - phi(coarse)) of coupled paths per level. For vector phi
// the coordinate variances are summed. With fixed_pool = false each Euler
// step of each path draws a fresh pool.
[[nodiscard]] std::vector<VarianceRow> variance_decay(const TargetModel& model, int l_lo, int l_hi,
                                                      std::size_t n, std::size_t repetitions, bool fixed_pool,
                                                      const Phi& phi, std::uint64_t seed, int jobs = 1,
                                                      DriftForm form = DriftForm::Grad);

struct RateRow {
  int level = 0;
  std::size_t n = 0;
  double second_moment = 0.0;
};

// E||(X^{l,N} - X^{l-1,N}) - (X^l - X^{l-1})||^2 with the second pair driven
// by the exact drift on the same grid.
[[nodiscard]] std::vector<RateRow> coupling_rate(const TargetModel& model, const std::vector<int>& levels,
                                                 const std::vector<std::size_t>& ns, std::size_t repetitions,
                                                 std::uint64_t seed, int jobs = 1);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares on (ln x, ln y).
[[nodiscard]] LogLogFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// ln z = c + a ln x + b ln y.
struct PlaneFit {
  double slope_x = 0.0;
  double slope_y = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
[[nodiscard]] PlaneFit fit_loglog_plane(const std::vector<double>& x, const std::vector<double>& y,
                                        const std::vector<double>& z);

// Default cost-scaling grid with `points` entries for one estimator kind:
//   single:       N = M = 4^k, L = l_min + k - 1
//   multilevel:   M = 4^k, l_start = l_min, l_target = l_min + k - 1
//   unbiased(-alt): randomization `params`, M = m0 * 2.5^(k-1)
// for k = 1..points.
[[nodiscard]] std::vector<EstimatorSpec> bench_grid(EstimatorKind kind, const RandomizationParams& params,
                                                    int points, std::size_t m0 = 100,
                                                    const McmcConfig& mcmc = {});

// Kolmogorov distribution tail P(K > lambda).
[[nodiscard]] double kolmogorov_sf(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};
// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
// Q((sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) D), ne = n m / (n + m).
[[nodiscard]] KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Nearest-rank quantile of unsorted data, q in (0, 1].
[[nodiscard]] double quantile(std::vector<double> values, double q);

// CSV writers. `header` lines are written as '#' comments.
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows, const std::vector<std::string>& header);
void write_variance_csv(std::ostream& out, const std::vector<VarianceRow>& rows,
                        const std::vector<std::string>& header);
void write_rate_csv(std::ostream& out, const std::vector<RateRow>& rows, const std::vector<std::string>& header);

}  // namespace sfs
