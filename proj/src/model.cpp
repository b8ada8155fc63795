#include "sfs/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sfs {
namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// log(1 + exp(u)) without overflow.
double softplus(double u) { return u > 0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

double sigmoid(double u) {
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

Phi identity_phi() {
  return [](std::span<const double> x) { return Vec(x.begin(), x.end()); };
}

Phi constant_phi(double c) {
  return [c](std::span<const double>) { return Vec{c}; };
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::uint64_t TargetModel::hash() const { return fnv1a(descriptor); }

void gaussian1d_drift(double mean, double variance, double x, double t, double& out) {
  // Completing the square in E_phi[f(x + sqrt(1-t) Z)] gives an affine drift.
  const double s = 1.0 - t;
  const double prec = 1.0 / variance;
  out = (mean * prec - x * (prec - 1.0)) / (1.0 + s * (prec - 1.0));
}

TargetModel gaussian1d(double mean, double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("gaussian1d: variance must be positive, got " + fmt_double(variance));
  }
  if (!std::isfinite(mean)) throw std::invalid_argument("gaussian1d: mean must be finite");
  TargetModel m;
  m.name = "gaussian1d";
  m.descriptor = "gaussian1d(mean=" + fmt_double(mean) + ",variance=" + fmt_double(variance) + ")";
  m.dim = 1;
  const double prec = 1.0 / variance;
  m.log_f = [mean, prec](std::span<const double> z) {
    const double u = z[0] - mean;
    return -0.5 * prec * u * u + 0.5 * z[0] * z[0];
  };
  m.grad_log_f = [mean, prec](std::span<const double> z, std::span<double> g) {
    g[0] = -prec * (z[0] - mean) + z[0];
  };
  m.reference_mean = Vec{mean};
  m.exact_drift = [mean, variance](std::span<const double> x, double t, std::span<double> out) {
    gaussian1d_drift(mean, variance, x[0], t, out[0]);
  };
  return m;
}

std::vector<std::array<double, 2>> default_mixture_means() {
  const std::array<double, 4> axis = {-1.0, -0.5, 0.5, 1.0};
  std::vector<std::array<double, 2>> means;
  for (double a : axis) {
    for (double b : axis) means.push_back({a, b});
  }
  return means;
}

TargetModel gaussian_mixture_2d(const std::vector<std::array<double, 2>>& means,
                                double component_variance) {
  if (means.empty()) throw std::invalid_argument("gaussian_mixture_2d: empty mean list");
  if (!(component_variance > 0.0)) {
    throw std::invalid_argument("gaussian_mixture_2d: component variance must be positive");
  }
  TargetModel m;
  m.name = "mixture";
  std::string desc = "mixture(variance=" + fmt_double(component_variance) + ",means=";
  for (const auto& mu : means) desc += "[" + fmt_double(mu[0]) + "," + fmt_double(mu[1]) + "]";
  m.descriptor = desc + ")";
  m.dim = 2;

  const double v = component_variance;
  const double k = static_cast<double>(means.size());
  // log pi - log phi, constants included so the value is an exact log-ratio.
  const double log_norm = -std::log(k) - std::log(v);
  auto shared_means = std::make_shared<const std::vector<std::array<double, 2>>>(means);

  m.log_f = [shared_means, v, log_norm](std::span<const double> x) {
    const auto& mus = *shared_means;
    double top = -std::numeric_limits<double>::infinity();
    // Two passes: find the max exponent, then accumulate.
    for (const auto& mu : mus) {
      const double dx = x[0] - mu[0];
      const double dy = x[1] - mu[1];
      top = std::max(top, -(dx * dx + dy * dy) / (2.0 * v));
    }
    double acc = 0.0;
    for (const auto& mu : mus) {
      const double dx = x[0] - mu[0];
      const double dy = x[1] - mu[1];
      acc += std::exp(-(dx * dx + dy * dy) / (2.0 * v) - top);
    }
    return top + std::log(acc) + log_norm + 0.5 * (x[0] * x[0] + x[1] * x[1]);
  };
  m.grad_log_f = [shared_means, v](std::span<const double> x, std::span<double> g) {
    const auto& mus = *shared_means;
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& mu : mus) {
      const double dx = x[0] - mu[0];
      const double dy = x[1] - mu[1];
      top = std::max(top, -(dx * dx + dy * dy) / (2.0 * v));
    }
    double wsum = 0.0;
    double gx = 0.0;
    double gy = 0.0;
    for (const auto& mu : mus) {
      const double dx = x[0] - mu[0];
      const double dy = x[1] - mu[1];
      const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * v) - top);
      wsum += w;
      gx -= w * dx;
      gy -= w * dy;
    }
    g[0] = gx / (wsum * v) + x[0];
    g[1] = gy / (wsum * v) + x[1];
  };
  Vec ref(2, 0.0);
  for (const auto& mu : means) {
    ref[0] += mu[0];
    ref[1] += mu[1];
  }
  ref[0] /= k;
  ref[1] /= k;
  m.reference_mean = ref;
  return m;
}

void finalize_logistic_data(LogisticData& data) {
  if (data.n == 0 || data.d == 0) throw std::invalid_argument("logistic data: n and d must be >= 1");
  if (data.covariates.size() != data.n * data.d) {
    throw std::invalid_argument("logistic data: covariates must be n x d");
  }
  if (data.responses.size() != data.n) {
    throw std::invalid_argument("logistic data: expected n responses");
  }
  for (int y : data.responses) {
    if (y != 0 && y != 1) throw std::invalid_argument("logistic data: responses must be 0 or 1");
  }
  const std::size_t d = data.d;
  data.prior_precision.assign(d * d, 0.0);
  for (std::size_t i = 0; i < data.n; ++i) {
    const auto x = data.row(i);
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) data.prior_precision[a * d + b] += x[a] * x[b];
    }
  }
  for (double& p : data.prior_precision) p /= static_cast<double>(data.n);
}

TargetModel logistic_regression(const LogisticData& data) {
  if (data.n == 0 || data.d == 0) throw std::invalid_argument("logistic_regression: empty data");
  if (data.covariates.size() != data.n * data.d || data.responses.size() != data.n) {
    throw std::invalid_argument("logistic_regression: covariates/responses shape mismatch");
  }
  if (data.prior_precision.size() != data.d * data.d) {
    throw std::invalid_argument("logistic_regression: prior precision is " +
                                std::to_string(data.prior_precision.size()) +
                                " entries, expected d*d = " + std::to_string(data.d * data.d));
  }
  TargetModel m;
  m.name = "logistic";
  m.dim = data.d;
  auto shared = std::make_shared<const LogisticData>(data);
  {
    std::ostringstream os;
    os << std::setprecision(17);
    for (double c : data.covariates) os << c << ',';
    for (int y : data.responses) os << y;
    m.descriptor = "logistic(n=" + std::to_string(data.n) + ",d=" + std::to_string(data.d) +
                   ",data=" + std::to_string(fnv1a(os.str())) + ")";
  }
  m.log_f = [shared](std::span<const double> beta) {
    const auto& dat = *shared;
    const std::size_t d = dat.d;
    double ll = 0.0;
    for (std::size_t i = 0; i < dat.n; ++i) {
      const auto x = dat.row(i);
      double u = 0.0;
      for (std::size_t j = 0; j < d; ++j) u += beta[j] * x[j];
      ll += dat.responses[i] * u - softplus(u);
    }
    double quad = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      double row = 0.0;
      for (std::size_t b = 0; b < d; ++b) row += dat.prior_precision[a * d + b] * beta[b];
      quad += beta[a] * row;
    }
    return ll - 0.5 * quad + 0.5 * squared_norm(beta);
  };
  m.grad_log_f = [shared](std::span<const double> beta, std::span<double> g) {
    const auto& dat = *shared;
    const std::size_t d = dat.d;
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t i = 0; i < dat.n; ++i) {
      const auto x = dat.row(i);
      double u = 0.0;
      for (std::size_t j = 0; j < d; ++j) u += beta[j] * x[j];
      const double r = dat.responses[i] - sigmoid(u);
      for (std::size_t j = 0; j < d; ++j) g[j] += r * x[j];
    }
    for (std::size_t a = 0; a < d; ++a) {
      double row = 0.0;
      for (std::size_t b = 0; b < d; ++b) row += dat.prior_precision[a * d + b] * beta[b];
      g[a] += beta[a] - row;
    }
  };
  return m;
}

TargetModel double_well(std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("double_well: dim must be >= 1");
  TargetModel m;
  m.name = "double_well";
  m.descriptor = "double_well(dim=" + std::to_string(dim) + ")";
  m.dim = dim;
  // -U(x) + |x|^2/2 with U(x) = |x|^4/4 - |x|^2/2.
  m.log_f = [](std::span<const double> x) {
    const double r2 = squared_norm(x);
    return -0.25 * r2 * r2 + r2;
  };
  m.grad_log_f = [](std::span<const double> x, std::span<double> g) {
    const double r2 = squared_norm(x);
    for (std::size_t j = 0; j < x.size(); ++j) g[j] = (2.0 - r2) * x[j];
  };
  m.reference_mean = Vec(dim, 0.0);
  return m;
}

LogisticData generate_logistic_data(RngStream stream, std::size_t n, std::size_t d,
                                    std::span<const double> beta_true) {
  if (n == 0 || d == 0) throw std::invalid_argument("generate_logistic_data: n and d must be >= 1");
  if (beta_true.size() != d) throw std::invalid_argument("generate_logistic_data: beta_true must have length d");
  LogisticData data;
  data.n = n;
  data.d = d;
  data.covariates.resize(n * d);
  for (double& c : data.covariates) c = (stream.next_u64() >> 63) ? 1.0 : -1.0;
  // Column-wise standardization with the population standard deviation.
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += data.covariates[i * d + j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = data.covariates[i * d + j] - mean;
      var += u * u;
    }
    var /= static_cast<double>(n);
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      data.covariates[i * d + j] = (data.covariates[i * d + j] - mean) / sd;
    }
  }
  data.responses.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = 0.0;
    for (std::size_t j = 0; j < d; ++j) u += beta_true[j] * data.covariates[i * d + j];
    data.responses[i] = stream.uniform() < sigmoid(u) ? 1 : 0;
  }
  finalize_logistic_data(data);
  return data;
}

void write_logistic_csv(std::ostream& out, const LogisticData& data) {
  out << std::setprecision(17);
  for (std::size_t j = 0; j < data.d; ++j) out << "x" << j << ',';
  out << "y\n";
  for (std::size_t i = 0; i < data.n; ++i) {
    for (double c : data.row(i)) out << c << ',';
    out << data.responses[i] << '\n';
  }
}

LogisticData read_logistic_csv(std::istream& in) {
  LogisticData data;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("logistic csv: missing header");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 2) throw std::invalid_argument("logistic csv: need at least one covariate column");
  data.d = columns - 1;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    if (values.size() != columns) {
      throw std::invalid_argument("logistic csv: line " + std::to_string(lineno) + " has " +
                                  std::to_string(values.size()) + " columns, expected " +
                                  std::to_string(columns));
    }
    data.covariates.insert(data.covariates.end(), values.begin(), values.end() - 1);
    data.responses.push_back(static_cast<int>(values.back()));
    ++data.n;
  }
  finalize_logistic_data(data);
  return data;
}

}  // namespace sfs
