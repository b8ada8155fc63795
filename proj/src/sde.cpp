#include "sfs/sde.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace sfs {
namespace {

void check_state(std::span<const double> x, std::size_t step, int level) {
  if (all_finite(x)) return;
  std::ostringstream os;
  os << "euler_path: non-finite state at step " << step << " of level " << level
     << " (|x|^2 = " << squared_norm(x) << ")";
  throw NumericalError(os.str());
}

}  // namespace

Vec euler_path(const BrownianGrid& grid, const DriftCallback& drift, std::span<const double> x0) {
  const std::size_t d = grid.dim();
  if (x0.size() != d) throw std::invalid_argument("euler_path: x0 dimension does not match grid");
  const double dt = grid.dt();
  Vec x(x0.begin(), x0.end());
  Vec b(d);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    drift(x, static_cast<double>(k) * dt, b);
    const auto dw = grid.increment(k);
    for (std::size_t j = 0; j < d; ++j) x[j] = x[j] + b[j] * dt + dw[j];
    check_state(x, k, grid.level());
  }
  return x;
}

Vec euler_path(const BrownianGrid& grid, const DriftCallback& drift) {
  const Vec origin(grid.dim(), 0.0);
  return euler_path(grid, drift, origin);
}

PathPair coupled_pair(const BrownianGrid& grid_fine, const GaussianPool& pool, const TargetModel& model,
                      DriftForm form) {
  if (grid_fine.level() < 1) throw std::invalid_argument("coupled_pair: fine level must be >= 1");
  PoolDrift drift(pool, model, form);
  const DriftCallback cb = [&drift](std::span<const double> x, double t, std::span<double> out) {
    drift(x, t, out);
  };
  PathPair out;
  out.fine = euler_path(grid_fine, cb);
  out.coarse = euler_path(coarsen(grid_fine), cb);
  return out;
}

CoupledQuadruple coupled_quadruple(const RngStream& stream, const TargetModel& model, int level,
                                   std::size_t n_hi, std::size_t n_lo, bool at_min_level,
                                   bool at_min_precision, const QuadrupleOptions& options) {
  if (level < 0) throw std::invalid_argument("coupled_quadruple: negative level");
  if (!at_min_level && level < 1) {
    throw std::invalid_argument("coupled_quadruple: a coarse level needs level >= 1");
  }
  if (!at_min_precision && n_lo > n_hi) {
    throw std::invalid_argument("coupled_quadruple: n_lo must not exceed n_hi");
  }
  const std::size_t d = model.dim;
  RngStream grid_stream = stream.substream(0, "brownian");
  RngStream pool_stream = stream.substream(0, "pool");
  const BrownianGrid fine = sample_brownian(grid_stream, level, d);
  const GaussianPool pool_hi = sample_pool(pool_stream, n_hi, d);

  CoupledQuadruple q;
  q.has_coarse = !at_min_level;
  q.has_lo = !at_min_precision;

  auto run = [&](const GaussianPool& pool, const BrownianGrid& grid) {
    PoolDrift drift(pool, model, options.form);
    return euler_path(grid, [&drift](std::span<const double> x, double t, std::span<double> out) {
      drift(x, t, out);
    });
  };

  std::optional<BrownianGrid> coarse;
  if (q.has_coarse) coarse.emplace(coarsen(fine));

  q.x_fine_hi = run(pool_hi, fine);
  if (q.has_coarse) q.x_coarse_hi = run(pool_hi, *coarse);
  if (q.has_lo) {
    std::optional<GaussianPool> pool_lo;
    if (options.independent_subpool) {
      RngStream sub_stream = stream.substream(0, "subpool");
      pool_lo.emplace(sample_pool(sub_stream, n_lo, d));
    } else {
      pool_lo.emplace(pool_hi.prefix_view(n_lo));
    }
    q.x_fine_lo = run(*pool_lo, fine);
    if (q.has_coarse) q.x_coarse_lo = run(*pool_lo, *coarse);
  }
  return q;
}

AltPair alt_coupled_pair(const RngStream& stream, const TargetModel& model, const BrownianGrid& grid_fine,
                         std::size_t n, const McmcConfig& cfg) {
  if (grid_fine.level() < 1) throw std::invalid_argument("alt_coupled_pair: level must be >= 1");
  const std::size_t d = model.dim;
  const BrownianGrid grid_coarse = coarsen(grid_fine);
  const double dt_fine = grid_fine.dt();
  const double dt_coarse = grid_coarse.dt();

  AltPair out;
  Vec x_coarse(d, 0.0);
  Vec x_fine(d, 0.0);
  for (std::size_t k = 0; k < grid_coarse.steps(); ++k) {
    const double t_coarse = static_cast<double>(k) * dt_coarse;
    RngStream chain_stream = stream.substream(k, "mcmc");
    const McmcDrift coarse_drift = drift_mcmc(chain_stream, x_coarse, t_coarse, model, n, cfg);

    // Fine substeps at times (2k + m) dt_fine, m = 0, 1, reweighting the
    // samples drawn from pi_{x_coarse, t_coarse}.
    for (std::size_t m = 0; m < 2; ++m) {
      const std::size_t fine_step = 2 * k + m;
      const double t_fine = static_cast<double>(fine_step) * dt_fine;
      const IsDrift b = drift_is(coarse_drift.samples, x_fine, x_coarse, t_fine, t_coarse, model);
      if (b.degenerate()) ++out.degenerate_weights;
      const auto dw = grid_fine.increment(fine_step);
      for (std::size_t j = 0; j < d; ++j) x_fine[j] = x_fine[j] + b.value[j] * dt_fine + dw[j];
      check_state(x_fine, fine_step, grid_fine.level());
    }

    const auto dw = grid_coarse.increment(k);
    for (std::size_t j = 0; j < d; ++j) {
      x_coarse[j] = x_coarse[j] + coarse_drift.value[j] * dt_coarse + dw[j];
    }
    check_state(x_coarse, k, grid_coarse.level());
  }
  out.fine = std::move(x_fine);
  out.coarse = std::move(x_coarse);
  return out;
}

AltPair alt_coupled_pair(const RngStream& stream, const TargetModel& model, int level, std::size_t n,
                         const McmcConfig& cfg) {
  if (level < 1) throw std::invalid_argument("alt_coupled_pair: level must be >= 1");
  RngStream grid_stream = stream.substream(0, "brownian");
  const BrownianGrid grid = sample_brownian(grid_stream, level, model.dim);
  return alt_coupled_pair(stream, model, grid, n, cfg);
}

Vec mcmc_euler_path(const RngStream& stream, const TargetModel& model, const BrownianGrid& grid,
                    std::size_t n, const McmcConfig& cfg) {
  const std::size_t d = model.dim;
  const double dt = grid.dt();
  Vec x(d, 0.0);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    RngStream chain_stream = stream.substream(k, "mcmc");
    const McmcDrift b = drift_mcmc(chain_stream, x, static_cast<double>(k) * dt, model, n, cfg);
    const auto dw = grid.increment(k);
    for (std::size_t j = 0; j < d; ++j) x[j] = x[j] + b.value[j] * dt + dw[j];
    check_state(x, k, grid.level());
  }
  return x;
}

}  // namespace sfs
