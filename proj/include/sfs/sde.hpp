#pragma once

// Euler-Maruyama integration of dX = b(X, t) dt + dW on [0, 1] and the
// coupled path constructions used by the multilevel and unbiased estimators.

#include <cstddef>
#include <functional>
#include <span>

#include "sfs/common.hpp"
#include "sfs/drift.hpp"
#include "sfs/mcmc.hpp"
#include "sfs/model.hpp"
#include "sfs/rng.hpp"

namespace sfs {

// drift(x, t, out)
using DriftCallback = std::function<void(std::span<const double>, double, std::span<double>)>;

// X_{k+1} = X_k + b(X_k, k dt) dt + dW_k, starting at x0; returns X_1.
[[nodiscard]] Vec euler_path(const BrownianGrid& grid, const DriftCallback& drift,
                             std::span<const double> x0);
// Same, started at the origin.
[[nodiscard]] Vec euler_path(const BrownianGrid& grid, const DriftCallback& drift);

struct PathPair {
  Vec fine;
  Vec coarse;
};

// Fine path on grid_fine and coarse path on coarsen(grid_fine), both driven by
// the drift estimated from the same fixed pool.
[[nodiscard]] PathPair coupled_pair(const BrownianGrid& grid_fine, const GaussianPool& pool,
                                    const TargetModel& model, DriftForm form = DriftForm::Grad);

// Terminal states X^L[N_P], X^{L-1}[N_P], X^L[N_{P-1}], X^{L-1}[N_{P-1}].
struct CoupledQuadruple {
  Vec x_fine_hi;
  Vec x_coarse_hi;
  Vec x_fine_lo;
  Vec x_coarse_lo;
  bool has_coarse = false;  // false at the minimum level
  bool has_lo = false;      // false at the minimum precision
};

struct QuadrupleOptions {
  DriftForm form = DriftForm::Grad;
  // Draw the low-precision pool afresh instead of taking the prefix of the
  // high-precision pool.
  bool independent_subpool = false;
};

// Draws one fine Brownian grid (role "brownian") and one pool of n_hi
// Gaussians (role "pool") from substreams of `stream`.
[[nodiscard]] CoupledQuadruple coupled_quadruple(const RngStream& stream, const TargetModel& model,
                                                 int level, std::size_t n_hi, std::size_t n_lo,
                                                 bool at_min_level, bool at_min_precision,
                                                 const QuadrupleOptions& options = {});

struct AltPair {
  Vec fine;
  Vec coarse;
  std::size_t degenerate_weights = 0;  // fine-level IS steps with ESS < 2
};

// MCMC drift on the coarse level, importance-reweighted reuse of the same
// samples for the two fine substeps. The chain for coarse step k uses the
// substream (k, "mcmc") of `stream`.
[[nodiscard]] AltPair alt_coupled_pair(const RngStream& stream, const TargetModel& model,
                                       const BrownianGrid& grid_fine, std::size_t n,
                                       const McmcConfig& cfg);
[[nodiscard]] AltPair alt_coupled_pair(const RngStream& stream, const TargetModel& model, int level,
                                       std::size_t n, const McmcConfig& cfg);

// Single-level path with the MCMC-mean drift; step k uses substream (k, "mcmc").
[[nodiscard]] Vec mcmc_euler_path(const RngStream& stream, const TargetModel& model,
                                  const BrownianGrid& grid, std::size_t n, const McmcConfig& cfg);

}  // namespace sfs
