#pragma once

// Truncated level / precision distributions and the single-term combination
// of a coupled quadruple.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "sfs/common.hpp"
#include "sfs/rng.hpp"
#include "sfs/sde.hpp"

namespace sfs {

// P(L) proportional to 2^{-exponent L} on {l_min, ..., l_max}.
class LevelDistribution {
 public:
  LevelDistribution(int l_min, int l_max, double exponent = 1.5);

  [[nodiscard]] int l_min() const { return l_min_; }
  [[nodiscard]] int l_max() const { return l_max_; }
  [[nodiscard]] double exponent() const { return exponent_; }
  [[nodiscard]] const std::vector<double>& masses() const { return masses_; }
  [[nodiscard]] bool contains(int l) const { return l >= l_min_ && l <= l_max_; }

 private:
  int l_min_;
  int l_max_;
  double exponent_;
  std::vector<double> masses_;
};

// P(P | L) proportional to g(P | L) on {p_min, ..., p_hi(L)} with
//   g = 2^{4-P}                 for P <= 4,
//   g = 2^{-P} P (log2 P)^2     for P > 4,
// and pool sizes N_P = n0 2^P. With cap_by_level, p_hi(L) = min(p_max, l_max - L)
// whenever that is at least p_min.
class PrecisionDistribution {
 public:
  PrecisionDistribution(int p_min, int p_max, std::uint64_t n0, const LevelDistribution& levels,
                        bool cap_by_level = false);

  [[nodiscard]] int p_min() const { return p_min_; }
  [[nodiscard]] int p_max() const { return p_max_; }
  [[nodiscard]] std::uint64_t n0() const { return n0_; }
  [[nodiscard]] bool cap_by_level() const { return cap_by_level_; }
  [[nodiscard]] int p_hi(int l) const;
  [[nodiscard]] std::uint64_t pool_size(int p) const { return n0_ << p; }
  // Normalized conditional masses for level l, indexed by p - p_min.
  [[nodiscard]] const std::vector<double>& masses(int l) const;
  [[nodiscard]] bool contains(int p, int l) const { return p >= p_min_ && p <= p_hi(l); }

  // Unnormalized g(P | L).
  [[nodiscard]] static double weight(int p);

 private:
  int p_min_;
  int p_max_;
  std::uint64_t n0_;
  bool cap_by_level_;
  int l_min_;
  int l_max_;
  std::vector<std::vector<double>> masses_;  // indexed by l - l_min
};

[[nodiscard]] double level_pmf(const LevelDistribution& dist, int l);
[[nodiscard]] double precision_pmf(const PrecisionDistribution& dist, int p, int l);

struct LevelPrecision {
  int level;
  int precision;
};

// L by inverse CDF, then P | L by inverse CDF.
[[nodiscard]] LevelPrecision sample_indices(RngStream& stream, const LevelDistribution& levels,
                                            const PrecisionDistribution& precisions);

// [(phi(fine_hi) - phi(coarse_hi)) - (phi(fine_lo) - phi(coarse_lo))] / (pL pP),
// with entries absent at the minimum level / precision taken as zero.
[[nodiscard]] Vec single_term_combine(const CoupledQuadruple& quad, const Phi& phi, double p_level,
                                      double p_precision, bool at_min_level, bool at_min_precision);

// Per-model randomization defaults.
struct RandomizationParams {
  int p_min;
  int p_max;
  int l_min;
  int l_max;
  std::uint64_t n0;
  bool operator==(const RandomizationParams&) const = default;
};

// Full-scale parameter table by model name: gaussian1d, mixture, logistic, double_well.
[[nodiscard]] RandomizationParams table1_defaults(std::string_view model_name);
// Reduced truncations that keep runs at desk scale.
[[nodiscard]] RandomizationParams desk_defaults(std::string_view model_name);

}  // namespace sfs
