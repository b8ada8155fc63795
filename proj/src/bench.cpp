#include "sfs/bench.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "sfs/parallel.hpp"
#include "sfs/rng.hpp"
#include "sfs/sde.hpp"

namespace sfs {
namespace {

void write_header(std::ostream& out, const std::vector<std::string>& header) {
  for (const auto& line : header) out << "# " << line << '\n';
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::uint64_t bench_seed(std::uint64_t seed, std::size_t g, std::size_t r) {
  return RngStream(seed).substream(g, "grid").substream(r, "rep").next_u64();
}

std::vector<BenchRow> mse_vs_cost(const TargetModel& model, const std::vector<EstimatorSpec>& grid,
                                  std::size_t repetitions, const Vec& reference, const Phi& phi,
                                  std::uint64_t seed, int jobs) {
  if (reference.empty()) throw std::invalid_argument("mse_vs_cost: missing reference");
  if (repetitions < 1) throw std::invalid_argument("mse_vs_cost: repetitions must be >= 1");
  const std::size_t tasks = grid.size() * repetitions;
  std::vector<Vec> estimates(tasks);
  std::vector<double> costs(tasks);
  parallel_for(tasks, jobs, [&](std::size_t i) {
    const std::size_t g = i / repetitions;
    const std::size_t r = i % repetitions;
    const EstimateReport rep = run_estimator(model, grid[g], phi, bench_seed(seed, g, r), 1);
    if (rep.mean.size() != reference.size()) {
      throw std::invalid_argument("mse_vs_cost: reference dimension does not match phi");
    }
    estimates[i] = rep.mean;
    costs[i] = static_cast<double>(rep.total_cost_units);
  });

  std::vector<BenchRow> rows;
  rows.reserve(grid.size());
  const auto R = static_cast<double>(repetitions);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    BenchRow row;
    row.tag = to_string(grid[g].kind);
    row.summary = grid[g].summary();
    row.repetitions = repetitions;
    row.seed = seed;
    const std::size_t d = reference.size();
    Vec mean(d, 0.0);
    std::vector<double> c(costs.begin() + static_cast<std::ptrdiff_t>(g * repetitions),
                          costs.begin() + static_cast<std::ptrdiff_t>((g + 1) * repetitions));
    for (std::size_t r = 0; r < repetitions; ++r) {
      const Vec& e = estimates[g * repetitions + r];
      for (std::size_t j = 0; j < d; ++j) {
        const double u = e[j] - reference[j];
        row.mse += u * u;
        mean[j] += e[j];
      }
      row.mean_cost_units += c[r];
    }
    row.mse /= R;
    row.mean_cost_units /= R;
    for (double& v : mean) v /= R;
    if (repetitions > 1) {
      for (std::size_t j = 0; j < d; ++j) {
        double ss = 0.0;
        for (std::size_t r = 0; r < repetitions; ++r) {
          const double u = estimates[g * repetitions + r][j] - mean[j];
          ss += u * u;
        }
        const double se = std::sqrt(ss / (R - 1.0) / R);
        const double bias = std::abs(mean[j] - reference[j]);
        if (se > 0.0) {
          row.bias_z = std::max(row.bias_z, bias / se);
        } else if (bias > 0.0) {
          row.bias_z = INFINITY;
        }
      }
    }
    row.cost_p50 = quantile(c, 0.50);
    row.cost_p90 = quantile(c, 0.90);
    row.cost_p99 = quantile(std::move(c), 0.99);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<VarianceRow> variance_decay(const TargetModel& model, int l_lo, int l_hi, std::size_t n,
                                        std::size_t repetitions, bool fixed_pool, const Phi& phi,
                                        std::uint64_t seed, int jobs, DriftForm form) {
  if (l_lo < 1 || l_hi > 12 || l_hi < l_lo) {
    throw std::invalid_argument("variance_decay: level range must lie within [1, 12]");
  }
  if (n < 1 || repetitions < 2) {
    throw std::invalid_argument("variance_decay: need n >= 1 and repetitions >= 2");
  }
  const std::size_t d = model.dim;
  const auto n_levels = static_cast<std::size_t>(l_hi - l_lo + 1);
  std::vector<Vec> diffs(n_levels * repetitions);
  parallel_for(diffs.size(), jobs, [&](std::size_t i) {
    const int l = l_lo + static_cast<int>(i / repetitions);
    const std::size_t r = i % repetitions;
    const RngStream rep = RngStream(seed).substream(static_cast<std::uint64_t>(l), "level").substream(r, "rep");
    RngStream grid_stream = rep.substream(0, "brownian");
    const BrownianGrid fine = sample_brownian(grid_stream, l, d);
    Vec x_fine;
    Vec x_coarse;
    if (fixed_pool) {
      RngStream pool_stream = rep.substream(0, "pool");
      const GaussianPool pool = sample_pool(pool_stream, n, d);
      PathPair pp = coupled_pair(fine, pool, model, form);
      x_fine = std::move(pp.fine);
      x_coarse = std::move(pp.coarse);
    } else {
      // Each path resamples its pool at every step, independently of the other level.
      auto refreshed = [&](const BrownianGrid& grid, std::string_view role) {
        RngStream pool_stream = rep.substream(0, role);
        GaussianPool pool = sample_pool(pool_stream, n, d);
        PoolDrift drift(pool, model, form);
        bool first = true;
        return euler_path(grid, [&](std::span<const double> x, double t, std::span<double> out) {
          if (!first) pool = sample_pool(pool_stream, n, d);
          first = false;
          drift(x, t, out);
        });
      };
      x_fine = refreshed(fine, "pool-fine");
      x_coarse = refreshed(coarsen(fine), "pool-coarse");
    }
    Vec a = phi(x_fine);
    const Vec b = phi(x_coarse);
    for (std::size_t j = 0; j < a.size(); ++j) a[j] -= b[j];
    diffs[i] = std::move(a);
  });

  std::vector<VarianceRow> rows;
  const auto R = static_cast<double>(repetitions);
  for (std::size_t k = 0; k < n_levels; ++k) {
    const std::size_t dd = diffs[k * repetitions].size();
    Vec mean(dd, 0.0);
    for (std::size_t r = 0; r < repetitions; ++r) {
      for (std::size_t j = 0; j < dd; ++j) mean[j] += diffs[k * repetitions + r][j];
    }
    for (double& v : mean) v /= R;
    double var = 0.0;
    for (std::size_t r = 0; r < repetitions; ++r) {
      for (std::size_t j = 0; j < dd; ++j) {
        const double u = diffs[k * repetitions + r][j] - mean[j];
        var += u * u;
      }
    }
    var /= R - 1.0;
    VarianceRow row;
    row.level = l_lo + static_cast<int>(k);
    row.variance = var;
    row.log2_variance = var > 0.0 ? std::log2(var) : -INFINITY;
    rows.push_back(row);
  }
  return rows;
}

std::vector<RateRow> coupling_rate(const TargetModel& model, const std::vector<int>& levels,
                                   const std::vector<std::size_t>& ns, std::size_t repetitions,
                                   std::uint64_t seed, int jobs) {
  if (!model.exact_drift) throw std::invalid_argument("coupling_rate: model has no exact drift");
  if (levels.empty() || ns.empty() || repetitions < 1) {
    throw std::invalid_argument("coupling_rate: empty level or pool-size range");
  }
  for (int l : levels) {
    if (l < 1 || l > 20) throw std::invalid_argument("coupling_rate: levels must lie in [1, 20]");
  }
  const std::size_t n_max = *std::max_element(ns.begin(), ns.end());
  const std::size_t d = model.dim;
  const DriftFn& exact = *model.exact_drift;
  // sq[(level index * repetitions + r) * |ns| + n index]
  std::vector<double> sq(levels.size() * repetitions * ns.size());
  parallel_for(levels.size() * repetitions, jobs, [&](std::size_t i) {
    const std::size_t li = i / repetitions;
    const std::size_t r = i % repetitions;
    const int l = levels[li];
    const RngStream rep = RngStream(seed).substream(static_cast<std::uint64_t>(l), "level").substream(r, "rep");
    RngStream grid_stream = rep.substream(0, "brownian");
    RngStream pool_stream = rep.substream(0, "pool");
    const BrownianGrid fine = sample_brownian(grid_stream, l, d);
    const BrownianGrid coarse = coarsen(fine);
    const GaussianPool big = sample_pool(pool_stream, n_max, d);
    const Vec ef = euler_path(fine, exact);
    const Vec ec = euler_path(coarse, exact);
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
      const GaussianPool pool = big.prefix_view(ns[ni]);
      const PathPair pp = coupled_pair(fine, pool, model, DriftForm::Grad);
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double u = (pp.fine[j] - pp.coarse[j]) - (ef[j] - ec[j]);
        s += u * u;
      }
      sq[i * ns.size() + ni] = s;
    }
  });

  std::vector<RateRow> rows;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
      double s = 0.0;
      for (std::size_t r = 0; r < repetitions; ++r) s += sq[(li * repetitions + r) * ns.size() + ni];
      rows.push_back({levels[li], ns[ni], s / static_cast<double>(repetitions)});
    }
  }
  return rows;
}

LogLogFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_loglog_slope: size mismatch");
  if (x.size() < 3) throw std::invalid_argument("fit_loglog_slope: need at least 3 points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::invalid_argument("fit_loglog_slope: coordinates must be positive");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_loglog_slope: x values are all equal");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

PlaneFit fit_loglog_plane(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& z) {
  const std::size_t n = x.size();
  if (y.size() != n || z.size() != n) throw std::invalid_argument("fit_loglog_plane: size mismatch");
  if (n < 4) throw std::invalid_argument("fit_loglog_plane: need at least 4 points");
  std::vector<std::array<double, 3>> rows(n);
  std::vector<double> lz(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !(z[i] > 0.0)) {
      throw std::invalid_argument("fit_loglog_plane: coordinates must be positive");
    }
    rows[i] = {1.0, std::log(x[i]), std::log(y[i])};
    lz[i] = std::log(z[i]);
  }
  // Normal equations, 3x3, solved by Gaussian elimination with pivoting.
  double a[3][4] = {};
  for (std::size_t i = 0; i < n; ++i) {
    for (int p = 0; p < 3; ++p) {
      for (int q = 0; q < 3; ++q) a[p][q] += rows[i][p] * rows[i][q];
      a[p][3] += rows[i][p] * lz[i];
    }
  }
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-12) throw std::invalid_argument("fit_loglog_plane: degenerate design");
    for (int q = 0; q < 4; ++q) std::swap(a[c][q], a[piv][q]);
    for (int r = 0; r < 3; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (int q = c; q < 4; ++q) a[r][q] -= f * a[c][q];
    }
  }
  PlaneFit fit;
  fit.intercept = a[0][3] / a[0][0];
  fit.slope_x = a[1][3] / a[1][1];
  fit.slope_y = a[2][3] / a[2][2];
  double mz = 0.0;
  for (double v : lz) mz += v;
  mz /= static_cast<double>(n);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = fit.intercept + fit.slope_x * rows[i][1] + fit.slope_y * rows[i][2];
    ss_res += (lz[i] - pred) * (lz[i] - pred);
    ss_tot += (lz[i] - mz) * (lz[i] - mz);
  }
  fit.r2 = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

std::vector<EstimatorSpec> bench_grid(EstimatorKind kind, const RandomizationParams& params, int points,
                                      std::size_t m0, const McmcConfig& mcmc) {
  if (points < 1 || points > 10) throw std::invalid_argument("bench_grid: points must lie in [1, 10]");
  std::vector<EstimatorSpec> grid;
  for (int k = 1; k <= points; ++k) {
    EstimatorSpec s;
    s.kind = kind;
    s.randomization = params;
    switch (kind) {
      case EstimatorKind::Single:
        s.n = std::size_t{1} << (2 * k);
        s.m = s.n;
        s.level = params.l_min + k - 1;
        s.fixed_pool = true;
        break;
      case EstimatorKind::Multilevel:
        s.m = std::size_t{1} << (2 * k);
        s.l_start = params.l_min;
        s.l_target = params.l_min + k - 1;
        break;
      case EstimatorKind::UnbiasedAlt:
        s.mcmc = mcmc;
        [[fallthrough]];
      case EstimatorKind::Unbiased:
        s.m = static_cast<std::size_t>(std::llround(static_cast<double>(m0) * std::pow(2.5, k - 1)));
        break;
    }
    grid.push_back(s);
  }
  return grid;
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  constexpr double pi = 3.14159265358979323846;
  if (lambda < 1.18) {
    // Small-lambda form of the CDF.
    double sum = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double j = 2.0 * k - 1.0;
      sum += std::exp(-j * j * pi * pi / (8.0 * lambda * lambda));
    }
    return 1.0 - std::sqrt(2.0 * pi) / lambda * sum;
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d)};
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty input");
  if (!(q > 0.0) || q > 1.0) throw std::invalid_argument("quantile: q must lie in (0, 1]");
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows, const std::vector<std::string>& header) {
  write_header(out, header);
  out << "estimator,config,repetitions,mse,mean_cost_units,cost_p50,cost_p90,cost_p99,seed,bias_z\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.tag << ',' << csv_escape(r.summary) << ',' << r.repetitions << ',' << r.mse << ','
        << r.mean_cost_units << ',' << r.cost_p50 << ',' << r.cost_p90 << ',' << r.cost_p99 << ',' << r.seed
        << ',' << r.bias_z << '\n';
  }
}

void write_variance_csv(std::ostream& out, const std::vector<VarianceRow>& rows,
                        const std::vector<std::string>& header) {
  write_header(out, header);
  out << "level,variance,log2_variance\n";
  out << std::setprecision(17);
  for (const auto& r : rows) out << r.level << ',' << r.variance << ',' << r.log2_variance << '\n';
}

void write_rate_csv(std::ostream& out, const std::vector<RateRow>& rows, const std::vector<std::string>& header) {
  write_header(out, header);
  out << "level,n,second_moment\n";
  out << std::setprecision(17);
  for (const auto& r : rows) out << r.level << ',' << r.n << ',' << r.second_moment << '\n';
}

}  // namespace sfs
