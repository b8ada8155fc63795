#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracle_values.hpp"
#include "sfs/model.hpp"

using namespace sfs;

namespace {

// Central differences of log_f against grad_log_f at random points.
void check_gradient(const TargetModel& m, double scale, std::uint64_t seed) {
  RngStream s(seed);
  Vec x(m.dim), g(m.dim), xp(m.dim), xm(m.dim);
  for (int trial = 0; trial < 100; ++trial) {
    for (double& v : x) v = scale * s.normal();
    m.grad_log_f(x, g);
    for (std::size_t j = 0; j < m.dim; ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[j]));
      xp = x;
      xm = x;
      xp[j] += h;
      xm[j] -= h;
      const double fd = (m.log_f(xp) - m.log_f(xm)) / (2 * h);
      REQUIRE(fd == doctest::Approx(g[j]).epsilon(1e-5).scale(1.0));
    }
  }
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("gaussian1d basics") {
    CHECK_THROWS((void)gaussian1d(0.0, 0.0));
    CHECK_THROWS((void)gaussian1d(0.0, -1.0));
    const TargetModel g = gaussian1d(1, 2);
    REQUIRE(g.reference_mean);
    CHECK((*g.reference_mean)[0] == 1.0);
    REQUIRE(g.exact_drift);
    CHECK(g.dim == 1);

    const TargetModel flat = gaussian1d(0, 1);
    Vec grad(1);
    for (double x : {-3.0, 0.0, 0.7, 5.0}) {
      const Vec p{x};
      CHECK(flat.log_f(p) == doctest::Approx(flat.log_f(Vec{0.0})));
      flat.grad_log_f(p, grad);
      CHECK(grad[0] == 0.0);
    }
  }

  TEST_CASE("gaussian1d exact drift against quadrature") {
    for (const auto& pt : oracle::kGaussianDrift) {
      const TargetModel g = gaussian1d(pt.mean, pt.var);
      Vec out(1);
      (*g.exact_drift)(Vec{pt.x}, pt.t, out);
      INFO("mean=" << pt.mean << " var=" << pt.var << " x=" << pt.x << " t=" << pt.t);
      CHECK(out[0] == doctest::Approx(pt.b).epsilon(1e-10).scale(1.0));
    }
  }

  TEST_CASE("gradients match finite differences") {
    check_gradient(gaussian1d(1, 2), 2.0, 1);
    check_gradient(gaussian_mixture_2d(default_mixture_means(), 0.03), 1.0, 2);
    check_gradient(double_well(1), 1.0, 3);
    check_gradient(double_well(5), 0.7, 4);
    const LogisticData data = generate_logistic_data(RngStream(5), 100, 5, Vec(5, 1.0));
    check_gradient(logistic_regression(data), 1.0, 5);
  }

  TEST_CASE("mixture") {
    const auto means = default_mixture_means();
    REQUIRE(means.size() == 16);
    const TargetModel m = gaussian_mixture_2d(means, 0.03);
    REQUIRE(m.reference_mean);
    CHECK((*m.reference_mean)[0] == doctest::Approx(0.0).scale(1.0));
    CHECK((*m.reference_mean)[1] == doctest::Approx(0.0).scale(1.0));
    CHECK_THROWS((void)gaussian_mixture_2d({}, 0.03));
    CHECK_THROWS((void)gaussian_mixture_2d(means, 0.0));

    // naive summation at a point without underflow, log f = log pi + |x|^2/2 + const;
    // compare differences between two points so the constant cancels
    auto naive = [&](double x, double y) {
      double s = 0;
      for (const auto& mu : means) {
        const double d2 = (x - mu[0]) * (x - mu[0]) + (y - mu[1]) * (y - mu[1]);
        s += std::exp(-d2 / (2 * 0.03)) / (2 * M_PI * 0.03) / 16.0;
      }
      return std::log(s) + 0.5 * (x * x + y * y) + std::log(2 * M_PI);
    };
    CHECK(m.log_f(Vec{0.0, 0.0}) == doctest::Approx(naive(0.0, 0.0)).epsilon(1e-12));
    CHECK(m.log_f(Vec{0.4, -0.6}) == doctest::Approx(naive(0.4, -0.6)).epsilon(1e-12));

    // single repeated mean: one Gaussian
    const TargetModel one = gaussian_mixture_2d(std::vector<std::array<double, 2>>(16, {0.3, -0.2}), 0.5);
    const TargetModel ref1 = gaussian_mixture_2d({{0.3, -0.2}}, 0.5);
    for (double x : {-1.0, 0.0, 2.0}) {
      CHECK(one.log_f(Vec{x, 0.5}) == doctest::Approx(ref1.log_f(Vec{x, 0.5})).epsilon(1e-12));
    }

    // no NaN in the |x| <= 10 envelope
    RngStream s(8);
    for (int i = 0; i < 1000; ++i) {
      const double r = 10.0 * s.uniform(), a = 2 * M_PI * s.uniform();
      REQUIRE(std::isfinite(m.log_f(Vec{r * std::cos(a), r * std::sin(a)})));
    }
  }

  TEST_CASE("double well") {
    const TargetModel dw30 = double_well(30);
    REQUIRE(dw30.reference_mean);
    CHECK(*dw30.reference_mean == Vec(30, 0.0));
    Vec g(30);
    dw30.grad_log_f(Vec(30, 0.0), g);
    CHECK(g == Vec(30, 0.0));
    const TargetModel dw1 = double_well(1);
    Vec g1(1);
    dw1.grad_log_f(Vec{1.0}, g1);
    CHECK(g1[0] == doctest::Approx(1.0));
    CHECK_THROWS((void)double_well(0));
  }

  TEST_CASE("logistic data and model") {
    const LogisticData a = generate_logistic_data(RngStream(3), 100, 5, Vec(5, 1.0));
    const LogisticData b = generate_logistic_data(RngStream(3), 100, 5, Vec(5, 1.0));
    CHECK(a.covariates == b.covariates);
    CHECK(a.responses == b.responses);
    for (int y : a.responses) CHECK((y == 0 || y == 1));
    // standardized columns, prior precision = X^T X / n
    for (std::size_t j = 0; j < 5; ++j) {
      double m = 0, v = 0;
      for (std::size_t i = 0; i < 100; ++i) m += a.row(i)[j];
      m /= 100;
      for (std::size_t i = 0; i < 100; ++i) v += (a.row(i)[j] - m) * (a.row(i)[j] - m);
      CHECK(m == doctest::Approx(0.0).scale(1.0));
      CHECK(v / 100 == doctest::Approx(1.0));
      for (std::size_t k = 0; k < 5; ++k) {
        double s = 0;
        for (std::size_t i = 0; i < 100; ++i) s += a.row(i)[j] * a.row(i)[k];
        CHECK(a.prior_precision[j * 5 + k] == doctest::Approx(s / 100));
      }
    }

    // beta = 0: fair coins
    const LogisticData coins = generate_logistic_data(RngStream(4), 20000, 2, Vec(2, 0.0));
    double ybar = 0;
    for (int y : coins.responses) ybar += y;
    CHECK(std::abs(ybar / 20000 - 0.5) < 4 * 0.5 / std::sqrt(20000.0));

    // gradient at beta = 0 is sum_i (y_i - 1/2) x_i
    const TargetModel lm = logistic_regression(a);
    Vec g(5);
    lm.grad_log_f(Vec(5, 0.0), g);
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0;
      for (std::size_t i = 0; i < 100; ++i) s += (a.responses[i] - 0.5) * a.row(i)[j];
      CHECK(g[j] == doctest::Approx(s).epsilon(1e-12).scale(1.0));
    }

    // zero covariate row: contributes -log 2
    LogisticData z;
    z.n = 2;
    z.d = 1;
    z.covariates = {0.0, 1.0};
    z.responses = {0, 1};
    finalize_logistic_data(z);
    LogisticData z1 = z;
    z1.n = 1;
    z1.covariates = {1.0};
    z1.responses = {1};
    z1.prior_precision = z.prior_precision;
    const TargetModel m2 = logistic_regression(z);
    const TargetModel m1 = logistic_regression(z1);
    for (double beta : {-1.0, 0.0, 0.5}) {
      CHECK(m2.log_f(Vec{beta}) - m1.log_f(Vec{beta}) == doctest::Approx(-std::log(2.0)));
    }

    // dimension mismatch
    LogisticData bad = a;
    bad.prior_precision.resize(4);
    CHECK_THROWS((void)logistic_regression(bad));

    // CSV round trip
    std::stringstream ss;
    write_logistic_csv(ss, a);
    const LogisticData r = read_logistic_csv(ss);
    CHECK(r.n == a.n);
    CHECK(r.d == a.d);
    CHECK(r.responses == a.responses);
    for (std::size_t i = 0; i < a.covariates.size(); ++i) CHECK(r.covariates[i] == a.covariates[i]);
  }
}
