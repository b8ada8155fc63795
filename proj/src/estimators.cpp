#include "sfs/estimators.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "sfs/parallel.hpp"
#include "sfs/sde.hpp"

namespace sfs {
namespace {

RngStream replicate_stream(std::uint64_t seed, std::size_t i) {
  return RngStream(seed).substream(i, "replicate");
}

void check_phi_value(const Vec& v, std::size_t i) {
  if (!all_finite(v)) {
    throw NumericalError("replicate " + std::to_string(i) + ": non-finite estimator value");
  }
}

// Ordered fold over replicates; independent of how they were scheduled.
void finalize(EstimateReport& report, std::chrono::steady_clock::time_point start) {
  const std::size_t m = report.replicates.size();
  const std::size_t d = m == 0 ? 0 : report.replicates.front().value.size();
  report.mean.assign(d, 0.0);
  report.standard_error.assign(d, 0.0);
  report.total_cost_units = 0;
  for (const auto& r : report.replicates) {
    for (std::size_t j = 0; j < d; ++j) report.mean[j] += r.value[j];
    report.total_cost_units += r.cost_units;
  }
  for (double& v : report.mean) v /= static_cast<double>(m);
  if (m > 1) {
    for (const auto& r : report.replicates) {
      for (std::size_t j = 0; j < d; ++j) {
        const double u = r.value[j] - report.mean[j];
        report.standard_error[j] += u * u;
      }
    }
    for (double& v : report.standard_error) {
      v = std::sqrt(v / static_cast<double>(m - 1) / static_cast<double>(m));
    }
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Vec pool_path(const TargetModel& model, const BrownianGrid& grid, const GaussianPool& pool, DriftForm form) {
  PoolDrift drift(pool, model, form);
  return euler_path(grid, [&drift](std::span<const double> x, double t, std::span<double> out) {
    drift(x, t, out);
  });
}

void check_common(std::size_t m) {
  if (m < 1) throw std::invalid_argument("estimator: m must be >= 1");
}

}  // namespace

std::uint64_t cost_single(std::uint64_t n, std::uint64_t m, int level) {
  if (level < 0) throw std::invalid_argument("cost_single: negative level");
  return n * m * (std::uint64_t{1} << level);
}

std::uint64_t ml_pool_size(int l_start, int l_target, int l) {
  if (l_start < 0 || l_target < l_start || l < l_start || l > l_target) {
    throw std::invalid_argument("ml_pool_size: need 0 <= l_start <= l <= l_target");
  }
  const auto levels = static_cast<std::uint64_t>(l_target - l_start + 1);
  return levels << (2 * l_target - l);
}

std::uint64_t cost_ml(int l_start, int l_target, std::uint64_t m) {
  std::uint64_t per_replicate = 0;
  for (int l = l_start; l <= l_target; ++l) {
    per_replicate += ml_pool_size(l_start, l_target, l) << l;
  }
  return m * per_replicate;
}

std::uint64_t cost_replicate(int level, int precision, bool at_min_level, bool at_min_precision,
                             std::uint64_t n0, int l_min) {
  if (level < 0 || precision < 0 || l_min < 0) {
    throw std::invalid_argument("cost_replicate: negative level or precision");
  }
  const std::uint64_t steps_min = std::uint64_t{1} << l_min;
  if (at_min_level && at_min_precision) return n0 * steps_min;
  if (level < 1 && !at_min_level) throw std::invalid_argument("cost_replicate: coarse level below 0");
  const std::uint64_t steps_pair =
      at_min_level ? steps_min : (std::uint64_t{1} << level) + (std::uint64_t{1} << (level - 1));
  if (at_min_precision) return n0 * steps_pair;
  if (precision < 1) throw std::invalid_argument("cost_replicate: precision below 1 with a lower pool");
  const std::uint64_t pools = (n0 << precision) + (n0 << (precision - 1));
  return pools * steps_pair;
}

EstimateReport sfs_biased(const TargetModel& model, int level, std::size_t n, std::size_t m, const Phi& phi,
                          bool fixed_pool, std::uint64_t seed, const RunOptions& options) {
  check_common(m);
  if (level < 0) throw std::invalid_argument("sfs_biased: level must be >= 0");
  if (n < 1) throw std::invalid_argument("sfs_biased: n must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t d = model.dim;
  EstimateReport report;
  report.seed = seed;
  report.replicates.resize(m);
  const std::uint64_t per_replicate = cost_single(n, 1, level);
  parallel_for(m, options.jobs, [&](std::size_t i) {
    const RngStream rep = replicate_stream(seed, i);
    RngStream grid_stream = rep.substream(0, "brownian");
    RngStream pool_stream = rep.substream(0, "pool");
    const BrownianGrid grid = sample_brownian(grid_stream, level, d);
    Vec x;
    if (fixed_pool) {
      const GaussianPool pool = sample_pool(pool_stream, n, d);
      x = pool_path(model, grid, pool, options.form);
    } else {
      GaussianPool pool = sample_pool(pool_stream, n, d);
      PoolDrift drift(pool, model, options.form);
      bool first = true;
      x = euler_path(grid, [&](std::span<const double> state, double t, std::span<double> out) {
        if (!first) {
          pool = sample_pool(pool_stream, n, d);
          drift.rebind(pool);
        }
        first = false;
        drift(state, t, out);
      });
    }
    auto& r = report.replicates[i];
    r.value = phi(x);
    check_phi_value(r.value, i);
    r.level = level;
    r.precision = -1;
    r.cost_units = per_replicate;
  });
  finalize(report, start);
  return report;
}

EstimateReport sfs_multilevel(const TargetModel& model, int l_start, int l_target, std::size_t m,
                              const Phi& phi, std::uint64_t seed, const RunOptions& options) {
  check_common(m);
  if (l_start < 0 || l_target < l_start) {
    throw std::invalid_argument("sfs_multilevel: need 0 <= l_start <= l_target");
  }
  const auto start = std::chrono::steady_clock::now();
  const std::size_t d = model.dim;
  EstimateReport report;
  report.seed = seed;
  report.replicates.resize(m);
  const std::uint64_t per_replicate = cost_ml(l_start, l_target, 1);
  parallel_for(m, options.jobs, [&](std::size_t i) {
    const RngStream rep = replicate_stream(seed, i);
    Vec total;
    for (int l = l_start; l <= l_target; ++l) {
      const RngStream lvl = rep.substream(static_cast<std::uint64_t>(l), "level");
      RngStream grid_stream = lvl.substream(0, "brownian");
      RngStream pool_stream = lvl.substream(0, "pool");
      const BrownianGrid grid = sample_brownian(grid_stream, l, d);
      const GaussianPool pool = sample_pool(pool_stream, ml_pool_size(l_start, l_target, l), d);
      Vec term = phi(pool_path(model, grid, pool, options.form));
      if (l > l_start) {
        const Vec coarse = phi(pool_path(model, coarsen(grid), pool, options.form));
        for (std::size_t j = 0; j < term.size(); ++j) term[j] -= coarse[j];
      }
      if (total.empty()) {
        total = std::move(term);
      } else {
        for (std::size_t j = 0; j < total.size(); ++j) total[j] += term[j];
      }
    }
    auto& r = report.replicates[i];
    r.value = std::move(total);
    check_phi_value(r.value, i);
    r.level = l_target;
    r.precision = -1;
    r.cost_units = per_replicate;
  });
  finalize(report, start);
  return report;
}

EstimateReport sfs_unbiased(const TargetModel& model, const LevelDistribution& levels,
                            const PrecisionDistribution& precisions, std::size_t m, const Phi& phi,
                            std::uint64_t seed, const RunOptions& options) {
  check_common(m);
  const auto start = std::chrono::steady_clock::now();
  EstimateReport report;
  report.seed = seed;
  report.replicates.resize(m);
  QuadrupleOptions qopts;
  qopts.form = options.form;
  qopts.independent_subpool = options.independent_subpool;
  parallel_for(m, options.jobs, [&](std::size_t i) {
    const RngStream rep = replicate_stream(seed, i);
    RngStream index_stream = rep.substream(0, "indices");
    const auto [l, p] = sample_indices(index_stream, levels, precisions);
    const bool min_level = l == levels.l_min();
    const bool min_precision = p == precisions.p_min();
    const std::uint64_t n_hi = precisions.pool_size(p);
    const std::uint64_t n_lo = min_precision ? n_hi : precisions.pool_size(p - 1);
    const CoupledQuadruple quad =
        coupled_quadruple(rep, model, l, n_hi, n_lo, min_level, min_precision, qopts);
    auto& r = report.replicates[i];
    r.value = single_term_combine(quad, phi, level_pmf(levels, l), precision_pmf(precisions, p, l),
                                  min_level, min_precision);
    check_phi_value(r.value, i);
    r.level = l;
    r.precision = p;
    r.cost_units = cost_replicate(l, p, min_level, min_precision, precisions.n0(), levels.l_min());
  });
  finalize(report, start);
  return report;
}

EstimateReport sfs_unbiased_alt(const TargetModel& model, const LevelDistribution& levels,
                                const PrecisionDistribution& precisions, std::size_t m, const Phi& phi,
                                const McmcConfig& mcmc, std::uint64_t seed, const RunOptions& options) {
  check_common(m);
  mcmc.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t d = model.dim;
  EstimateReport report;
  report.seed = seed;
  report.replicates.resize(m);
  std::vector<std::size_t> degenerate(m, 0);
  parallel_for(m, options.jobs, [&](std::size_t i) {
    const RngStream rep = replicate_stream(seed, i);
    RngStream index_stream = rep.substream(0, "indices");
    const auto [l, p] = sample_indices(index_stream, levels, precisions);
    const bool min_level = l == levels.l_min();
    const bool min_precision = p == precisions.p_min();
    const std::uint64_t n_hi = precisions.pool_size(p);
    const std::uint64_t n_lo = min_precision ? n_hi : precisions.pool_size(p - 1);
    RngStream grid_stream = rep.substream(0, "brownian");
    const BrownianGrid grid = sample_brownian(grid_stream, l, d);
    // Both precisions share the Wiener increments and the chain streams.
    const RngStream chains = rep.substream(0, "alt");

    CoupledQuadruple quad;
    quad.has_coarse = !min_level;
    quad.has_lo = !min_precision;
    if (min_level) {
      quad.x_fine_hi = mcmc_euler_path(chains, model, grid, n_hi, mcmc);
      if (quad.has_lo) quad.x_fine_lo = mcmc_euler_path(chains, model, grid, n_lo, mcmc);
    } else {
      AltPair hi = alt_coupled_pair(chains, model, grid, n_hi, mcmc);
      degenerate[i] += hi.degenerate_weights;
      quad.x_fine_hi = std::move(hi.fine);
      quad.x_coarse_hi = std::move(hi.coarse);
      if (quad.has_lo) {
        AltPair lo = alt_coupled_pair(chains, model, grid, n_lo, mcmc);
        degenerate[i] += lo.degenerate_weights;
        quad.x_fine_lo = std::move(lo.fine);
        quad.x_coarse_lo = std::move(lo.coarse);
      }
    }
    auto& r = report.replicates[i];
    r.value = single_term_combine(quad, phi, level_pmf(levels, l), precision_pmf(precisions, p, l),
                                  min_level, min_precision);
    check_phi_value(r.value, i);
    r.level = l;
    r.precision = p;
    r.cost_units = cost_replicate(l, p, min_level, min_precision, precisions.n0(), levels.l_min());
  });
  for (std::size_t c : degenerate) report.degenerate_weights += c;
  finalize(report, start);
  return report;
}

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Single:
      return "single";
    case EstimatorKind::Multilevel:
      return "multilevel";
    case EstimatorKind::Unbiased:
      return "unbiased";
    case EstimatorKind::UnbiasedAlt:
      return "unbiased-alt";
  }
  return "unbiased";
}

EstimatorKind parse_estimator_kind(std::string_view s) {
  if (s == "single") return EstimatorKind::Single;
  if (s == "multilevel") return EstimatorKind::Multilevel;
  if (s == "unbiased") return EstimatorKind::Unbiased;
  if (s == "unbiased-alt") return EstimatorKind::UnbiasedAlt;
  throw std::invalid_argument("unknown estimator '" + std::string(s) +
                              "' (expected single | multilevel | unbiased | unbiased-alt)");
}

std::string EstimatorSpec::summary() const {
  std::ostringstream os;
  os << to_string(kind) << " m=" << m;
  switch (kind) {
    case EstimatorKind::Single:
      os << " level=" << level << " n=" << n << (fixed_pool ? " fixed" : " refreshed");
      break;
    case EstimatorKind::Multilevel:
      os << " l_start=" << l_start << " l_target=" << l_target;
      break;
    case EstimatorKind::Unbiased:
    case EstimatorKind::UnbiasedAlt:
      os << " L=" << randomization.l_min << ".." << randomization.l_max << " P=" << randomization.p_min
         << ".." << randomization.p_max << " n0=" << randomization.n0;
      break;
  }
  return os.str();
}

EstimateReport run_estimator(const TargetModel& model, const EstimatorSpec& spec, const Phi& phi,
                             std::uint64_t seed, int jobs) {
  RunOptions opts;
  opts.jobs = jobs;
  opts.form = spec.form;
  opts.independent_subpool = spec.independent_subpool;
  switch (spec.kind) {
    case EstimatorKind::Single:
      return sfs_biased(model, spec.level, spec.n, spec.m, phi, spec.fixed_pool, seed, opts);
    case EstimatorKind::Multilevel:
      return sfs_multilevel(model, spec.l_start, spec.l_target, spec.m, phi, seed, opts);
    case EstimatorKind::Unbiased:
    case EstimatorKind::UnbiasedAlt: {
      const auto& r = spec.randomization;
      const LevelDistribution levels(r.l_min, r.l_max, spec.level_exponent);
      const PrecisionDistribution precisions(r.p_min, r.p_max, r.n0, levels, spec.cap_precision_by_level);
      if (spec.kind == EstimatorKind::Unbiased) {
        return sfs_unbiased(model, levels, precisions, spec.m, phi, seed, opts);
      }
      if (!spec.mcmc) throw std::invalid_argument("unbiased-alt requires an mcmc configuration");
      return sfs_unbiased_alt(model, levels, precisions, spec.m, phi, *spec.mcmc, seed, opts);
    }
  }
  throw std::logic_error("run_estimator: unhandled estimator kind");
}

void write_replicates_csv(std::ostream& out, const EstimateReport& report, const std::vector<std::string>& header) {
  for (const auto& line : header) out << "# " << line << '\n';
  const std::size_t d = report.mean.size();
  out << "replicate,L,P,cost_units";
  for (std::size_t j = 0; j < d; ++j) out << ",value_" << j;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < report.replicates.size(); ++i) {
    const auto& r = report.replicates[i];
    out << i << ',' << r.level << ',' << r.precision << ',' << r.cost_units;
    for (double v : r.value) out << ',' << v;
    out << '\n';
  }
}

}  // namespace sfs
