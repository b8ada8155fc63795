#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracle_values.hpp"
#include "sfs/bench.hpp"

using namespace sfs;

TEST_SUITE("bench") {
  TEST_CASE("log-log fits") {
    const std::vector<double> x{1, 2, 4, 8, 16};
    std::vector<double> sq, flat, inv;
    for (double v : x) {
      sq.push_back(v * v);
      flat.push_back(7.0);
      inv.push_back(3.0 / v);
    }
    const LogLogFit a = fit_loglog_slope(x, sq);
    CHECK(a.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(a.r2 == doctest::Approx(1.0));
    CHECK(fit_loglog_slope(x, flat).slope == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    const LogLogFit c = fit_loglog_slope(x, inv);
    CHECK(c.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(c.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK_THROWS((void)fit_loglog_slope({1, 2}, {1, 2}));
    CHECK_THROWS((void)fit_loglog_slope({1, 2, 3}, {1, 0, 2}));

    std::vector<double> px, py, pz;
    for (double u : {1.0, 2.0, 4.0}) {
      for (double v : {1.0, 3.0, 9.0}) {
        px.push_back(u);
        py.push_back(v);
        pz.push_back(5.0 * std::pow(u, -1.5) / v);
      }
    }
    const PlaneFit p = fit_loglog_plane(px, py, pz);
    CHECK(p.slope_x == doctest::Approx(-1.5).epsilon(1e-12));
    CHECK(p.slope_y == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(p.intercept == doctest::Approx(std::log(5.0)).epsilon(1e-12));
  }

  TEST_CASE("kolmogorov tail") {
    for (const auto& o : oracle::kKolmogorov) {
      CHECK(kolmogorov_sf(o.lambda) == doctest::Approx(o.sf).epsilon(1e-10).scale(1.0));
    }
    CHECK(kolmogorov_sf(0.0) == 1.0);
  }

  TEST_CASE("two-sample KS") {
    RngStream s(1);
    std::vector<double> a, b, c;
    for (int i = 0; i < 5000; ++i) {
      a.push_back(s.normal());
      b.push_back(s.normal());
      c.push_back(s.normal() + 0.2);
    }
    CHECK(ks_two_sample(a, b).p_value > 0.01);
    CHECK(ks_two_sample(a, c).p_value < 1e-6);
    CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}).statistic == 0.0);
  }

  TEST_CASE("quantiles") {
    std::vector<double> v;
    for (int i = 100; i >= 1; --i) v.push_back(i);
    CHECK(quantile(v, 0.5) == 50);
    CHECK(quantile(v, 0.9) == 90);
    CHECK(quantile(v, 0.99) == 99);
    CHECK(quantile(v, 1.0) == 100);
    CHECK(quantile(v, 0.5) <= quantile(v, 0.9));
  }

  TEST_CASE("mse against cost") {
    const TargetModel g = gaussian1d(1, 2);
    EstimatorSpec s;
    s.kind = EstimatorKind::Single;
    s.level = 3;
    s.n = 16;
    s.m = 20;
    const std::vector<BenchRow> rows = mse_vs_cost(g, {s}, 5, Vec{3.0}, constant_phi(3.0), 7);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mse == 0.0);
    CHECK(rows[0].mean_cost_units == cost_single(16, 20, 3));
    CHECK_THROWS((void)mse_vs_cost(g, {s}, 5, Vec{}, identity_phi(), 7));

    EstimatorSpec a = s, b = s;
    a.m = 50;
    b.m = 100;
    const std::vector<BenchRow> r2 = mse_vs_cost(g, {a, b}, 400, Vec{1.0}, identity_phi(), 8, 2);
    const double ratio = r2[1].mse / r2[0].mse;
    CHECK(ratio > 0.35);
    CHECK(ratio < 0.7);
    CHECK(r2[0].seed == 8);
    CHECK(bench_seed(8, 0, 0) != bench_seed(8, 0, 1));
    CHECK(r2[0].cost_p50 <= r2[0].cost_p99);
    std::ostringstream os;
    write_bench_csv(os, r2, {"x"});
    CHECK(os.str().rfind("# x\n", 0) == 0);
  }

  TEST_CASE("variance decay") {
    const TargetModel flat = gaussian1d(0, 1);
    for (const VarianceRow& r : variance_decay(flat, 1, 4, 16, 50, true, identity_phi(), 1)) {
      CHECK(r.variance == 0.0);
    }
    const TargetModel g = gaussian1d(1, 2);
    const auto a = variance_decay(g, 1, 4, 16, 200, true, identity_phi(), 2, 1);
    const auto b = variance_decay(g, 1, 4, 16, 200, true, identity_phi(), 2, 3);
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].variance == b[i].variance);
    CHECK(a[3].variance < a[0].variance);
    CHECK_THROWS((void)variance_decay(g, 0, 4, 16, 200, true, identity_phi(), 2));
  }

  TEST_CASE("coupling rates") {
    const TargetModel g = gaussian1d(1, 2);
    const auto rows = coupling_rate(g, {2, 3}, {16, 64}, 200, 3);
    CHECK(rows.size() == 4);
    for (const auto& r : rows) CHECK(r.second_moment >= 0.0);
    CHECK_THROWS((void)coupling_rate(double_well(2), {2}, {16}, 10, 3));
  }

  TEST_CASE("default grids") {
    const RandomizationParams rp{2, 8, 1, 6, 10};
    const auto s = bench_grid(EstimatorKind::Single, rp, 3);
    REQUIRE(s.size() == 3);
    CHECK(s[2].n == 64);
    CHECK(s[2].m == 64);
    CHECK(s[2].level == 3);
    const auto m = bench_grid(EstimatorKind::Multilevel, rp, 2);
    CHECK(m[1].l_target == 2);
    CHECK(m[1].m == 16);
    const auto u = bench_grid(EstimatorKind::Unbiased, rp, 3, 100);
    CHECK(u[0].m == 100);
    CHECK(u[1].m == 250);
    CHECK(u[2].randomization == rp);
  }
}
