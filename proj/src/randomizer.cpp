#include "sfs/randomizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sfs {
namespace {

std::vector<double> normalized(std::vector<double> w) {
  double sum = 0.0;
  for (double v : w) sum += v;
  for (double& v : w) v /= sum;
  return w;
}

int inverse_cdf(RngStream& stream, const std::vector<double>& masses) {
  const double u = stream.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < masses.size(); ++i) {
    acc += masses[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(masses.size()) - 1;
}

}  // namespace

LevelDistribution::LevelDistribution(int l_min, int l_max, double exponent)
    : l_min_(l_min), l_max_(l_max), exponent_(exponent) {
  if (l_min < 0) throw std::invalid_argument("LevelDistribution: l_min must be >= 0");
  if (l_max < l_min) throw std::invalid_argument("LevelDistribution: l_max must be >= l_min");
  if (l_max > 24) throw std::invalid_argument("LevelDistribution: l_max must be <= 24");
  std::vector<double> w;
  for (int l = l_min; l <= l_max; ++l) w.push_back(std::exp2(-exponent * l));
  masses_ = normalized(std::move(w));
}

double PrecisionDistribution::weight(int p) {
  if (p <= 4) return std::exp2(4.0 - p);
  const double lg = std::log2(static_cast<double>(p));
  return std::exp2(-static_cast<double>(p)) * p * lg * lg;
}

PrecisionDistribution::PrecisionDistribution(int p_min, int p_max, std::uint64_t n0,
                                             const LevelDistribution& levels, bool cap_by_level)
    : p_min_(p_min), p_max_(p_max), n0_(n0), cap_by_level_(cap_by_level),
      l_min_(levels.l_min()), l_max_(levels.l_max()) {
  if (p_min < 0) throw std::invalid_argument("PrecisionDistribution: p_min must be >= 0");
  if (p_max < p_min) throw std::invalid_argument("PrecisionDistribution: p_max must be >= p_min");
  if (p_max > 40) throw std::invalid_argument("PrecisionDistribution: p_max must be <= 40");
  if (n0 < 1) throw std::invalid_argument("PrecisionDistribution: n0 must be >= 1");
  for (int l = l_min_; l <= l_max_; ++l) {
    std::vector<double> w;
    for (int p = p_min_; p <= p_hi(l); ++p) w.push_back(weight(p));
    masses_.push_back(normalized(std::move(w)));
  }
}

int PrecisionDistribution::p_hi(int l) const {
  if (!cap_by_level_) return p_max_;
  const int cap = l_max_ - l;
  return cap >= p_min_ ? std::min(p_max_, cap) : p_max_;
}

const std::vector<double>& PrecisionDistribution::masses(int l) const {
  if (l < l_min_ || l > l_max_) {
    throw std::out_of_range("PrecisionDistribution: level " + std::to_string(l) + " outside [" +
                            std::to_string(l_min_) + ", " + std::to_string(l_max_) + "]");
  }
  return masses_[static_cast<std::size_t>(l - l_min_)];
}

double level_pmf(const LevelDistribution& dist, int l) {
  if (!dist.contains(l)) {
    throw std::out_of_range("level_pmf: level " + std::to_string(l) + " outside the support");
  }
  return dist.masses()[static_cast<std::size_t>(l - dist.l_min())];
}

double precision_pmf(const PrecisionDistribution& dist, int p, int l) {
  const auto& m = dist.masses(l);
  if (!dist.contains(p, l)) {
    throw std::out_of_range("precision_pmf: precision " + std::to_string(p) + " outside the support");
  }
  return m[static_cast<std::size_t>(p - dist.p_min())];
}

LevelPrecision sample_indices(RngStream& stream, const LevelDistribution& levels,
                              const PrecisionDistribution& precisions) {
  const int l = levels.l_min() + inverse_cdf(stream, levels.masses());
  const int p = precisions.p_min() + inverse_cdf(stream, precisions.masses(l));
  return {l, p};
}

Vec single_term_combine(const CoupledQuadruple& quad, const Phi& phi, double p_level, double p_precision,
                        bool at_min_level, bool at_min_precision) {
  if (!(p_level > 0.0) || !(p_precision > 0.0)) {
    throw std::invalid_argument("single_term_combine: probabilities must be positive");
  }
  if (quad.has_coarse == at_min_level || quad.has_lo == at_min_precision) {
    throw std::invalid_argument("single_term_combine: quadruple flags inconsistent with minima");
  }
  Vec hi = phi(quad.x_fine_hi);
  if (quad.has_coarse) {
    const Vec c = phi(quad.x_coarse_hi);
    for (std::size_t j = 0; j < hi.size(); ++j) hi[j] -= c[j];
  }
  if (quad.has_lo) {
    Vec lo = phi(quad.x_fine_lo);
    if (quad.has_coarse) {
      const Vec c = phi(quad.x_coarse_lo);
      for (std::size_t j = 0; j < lo.size(); ++j) lo[j] -= c[j];
    }
    for (std::size_t j = 0; j < hi.size(); ++j) hi[j] -= lo[j];
  }
  const double denom = p_level * p_precision;
  for (double& v : hi) v /= denom;
  return hi;
}

RandomizationParams table1_defaults(std::string_view model_name) {
  if (model_name == "gaussian1d") return {2, 15, 1, 8, 10};
  if (model_name == "mixture") return {1, 9, 2, 8, 10};
  if (model_name == "logistic") return {1, 9, 3, 9, 10};
  if (model_name == "double_well") return {1, 9, 6, 12, 8};
  throw std::invalid_argument("no randomization defaults for model '" + std::string(model_name) + "'");
}

RandomizationParams desk_defaults(std::string_view model_name) {
  if (model_name == "gaussian1d") return {2, 8, 1, 6, 10};
  if (model_name == "mixture") return {1, 7, 2, 6, 10};
  if (model_name == "logistic") return {1, 5, 3, 6, 10};
  if (model_name == "double_well") return {1, 7, 3, 6, 8};
  throw std::invalid_argument("no randomization defaults for model '" + std::string(model_name) + "'");
}

}  // namespace sfs
