#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sfs/bench.hpp"
#include "sfs/estimators.hpp"

using namespace sfs;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// One-sample KS against N(0, 1) with the asymptotic p-value.
double ks_normal_p(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double c = normal_cdf(v[i]);
    d = std::max({d, (i + 1) / n - c, c - i / n});
  }
  return kolmogorov_sf((std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d);
}

std::vector<double> first_coordinate(const EstimateReport& r) {
  std::vector<double> v;
  for (const auto& x : r.replicates) v.push_back(x.value[0]);
  return v;
}

}  // namespace

TEST_SUITE("estimators") {
  TEST_CASE("closed-form costs") {
    CHECK(cost_single(10, 100, 3) == 8000);
    CHECK(cost_single(10, 10, 0) == 100);
    CHECK(ml_pool_size(1, 3, 2) == 48);
    CHECK(ml_pool_size(2, 2, 2) == 4);
    CHECK_THROWS((void)ml_pool_size(2, 3, 1));

    for (int ls = 0; ls <= 3; ++ls) {
      for (int lt = ls; lt <= 6; ++lt) {
        std::uint64_t brute = 0;
        for (int l = ls; l <= lt; ++l) {
          const std::uint64_t n = static_cast<std::uint64_t>(lt - ls + 1) * (std::uint64_t{1} << (2 * lt - l));
          brute += n * (std::uint64_t{1} << l);
        }
        CHECK(cost_ml(ls, lt, 7) == 7 * brute);
      }
    }
  }

  TEST_CASE("replicate cost table") {
    const std::uint64_t n0 = 10;
    CHECK(cost_replicate(1, 2, true, true, n0, 1) == 20);
    CHECK(cost_replicate(3, 2, false, true, n0, 1) == 120);
    for (int l_min = 0; l_min <= 2; ++l_min) {
      for (int p_min = 0; p_min <= 2; ++p_min) {
        for (int l = l_min; l <= l_min + 3; ++l) {
          for (int p = p_min; p <= p_min + 3; ++p) {
            const bool ml = l == l_min, mp = p == p_min;
            const std::uint64_t np = n0 << p;
            const std::uint64_t steps_min = std::uint64_t{1} << l_min;
            std::uint64_t expect;
            if (ml && mp) {
              expect = n0 * steps_min;
            } else if (mp) {
              expect = n0 * ((std::uint64_t{1} << l) + (std::uint64_t{1} << (l - 1)));
            } else if (ml) {
              expect = (np + np / 2) * steps_min;
            } else {
              expect = (np + np / 2) * ((std::uint64_t{1} << l) + (std::uint64_t{1} << (l - 1)));
            }
            CHECK(cost_replicate(l, p, ml, mp, n0, l_min) == expect);
          }
        }
      }
    }
    CHECK_THROWS((void)cost_replicate(0, 2, false, false, n0, 0));
    CHECK_THROWS((void)cost_replicate(-1, 2, true, true, n0, 0));
  }

  TEST_CASE("biased estimator with constant f is Brownian") {
    const TargetModel flat = gaussian1d(0, 1);
    const EstimateReport r = sfs_biased(flat, 4, 8, 10000, identity_phi(), true, 3);
    CHECK(ks_normal_p(first_coordinate(r)) > 0.01);
    CHECK(r.total_cost_units == cost_single(8, 10000, 4));
  }

  TEST_CASE("biased estimator on a Gaussian") {
    const TargetModel g = gaussian1d(1, 2);
    const EstimateReport r = sfs_biased(g, 6, 256, 4000, identity_phi(), true, 4);
    CHECK(std::abs(r.mean[0] - 1.0) < 0.15);
    CHECK(r.standard_error[0] > 0.0);
    const EstimateReport rr = sfs_biased(g, 6, 256, 4000, identity_phi(), false, 4);
    CHECK(std::abs(rr.mean[0] - 1.0) < 0.15);
    CHECK(rr.mean != r.mean);
  }

  TEST_CASE("jobs do not change results") {
    const TargetModel g = gaussian1d(1, 2);
    EstimatorSpec single;
    single.kind = EstimatorKind::Single;
    single.m = 64;
    EstimatorSpec ml;
    ml.kind = EstimatorKind::Multilevel;
    ml.m = 32;
    ml.l_target = 3;
    EstimatorSpec ub;
    ub.kind = EstimatorKind::Unbiased;
    ub.m = 64;
    ub.randomization = {1, 4, 1, 4, 4};
    EstimatorSpec alt = ub;
    alt.kind = EstimatorKind::UnbiasedAlt;
    alt.m = 16;
    alt.mcmc = McmcConfig{1.5, 32, 20, 1};
    for (const EstimatorSpec& spec : {single, ml, ub, alt}) {
      const EstimateReport a = run_estimator(g, spec, identity_phi(), 11, 1);
      const EstimateReport b = run_estimator(g, spec, identity_phi(), 11, 4);
      CHECK(a.mean == b.mean);
      CHECK(a.standard_error == b.standard_error);
      CHECK(a.total_cost_units == b.total_cost_units);
      CHECK(a.degenerate_weights == b.degenerate_weights);
      REQUIRE(a.replicates.size() == b.replicates.size());
      std::uint64_t sum = 0;
      for (std::size_t i = 0; i < a.replicates.size(); ++i) {
        CHECK(a.replicates[i].value == b.replicates[i].value);
        sum += a.replicates[i].cost_units;
      }
      CHECK(a.total_cost_units == sum);
    }
  }

  TEST_CASE("unbiased with degenerate supports equals biased") {
    const TargetModel g = gaussian1d(1, 2);
    const LevelDistribution lv(3, 3);
    const PrecisionDistribution pd(2, 2, 10, lv);
    const EstimateReport u = sfs_unbiased(g, lv, pd, 50, identity_phi(), 21);
    const EstimateReport b = sfs_biased(g, 3, 40, 50, identity_phi(), true, 21);
    for (std::size_t i = 0; i < 50; ++i) CHECK(u.replicates[i].value == b.replicates[i].value);
    CHECK(u.replicates[0].cost_units == cost_replicate(3, 2, true, true, 10, 3));
  }

  TEST_CASE("unbiased on constant phi") {
    const TargetModel g = gaussian1d(1, 2);
    const LevelDistribution lv(1, 4);
    const PrecisionDistribution pd(1, 4, 4, lv);
    const EstimateReport r = sfs_unbiased(g, lv, pd, 2000, constant_phi(5.0), 22);
    double p00 = level_pmf(lv, 1) * precision_pmf(pd, 1, 1);
    for (const auto& rep : r.replicates) {
      if (rep.level == 1 && rep.precision == 1) {
        CHECK(rep.value[0] == doctest::Approx(5.0 / p00).epsilon(1e-15));
      } else {
        CHECK(rep.value[0] == 0.0);
      }
    }
    CHECK(std::abs(r.mean[0] - 5.0) < 4 * r.standard_error[0]);
  }

  TEST_CASE("unbiased with constant f has no corrections") {
    const TargetModel flat = gaussian1d(0, 1);
    const LevelDistribution lv(1, 4);
    const PrecisionDistribution pd(1, 4, 4, lv);
    const EstimateReport r = sfs_unbiased(flat, lv, pd, 300, identity_phi(), 23);
    for (const auto& rep : r.replicates) {
      if (rep.level != 1 || rep.precision != 1) {
        CHECK(rep.value[0] == 0.0);
      }
    }
  }

  TEST_CASE("multilevel") {
    const TargetModel g = gaussian1d(1, 2);
    // one level is a single biased path with the level's pool size
    const EstimateReport a = sfs_multilevel(g, 3, 3, 20, identity_phi(), 31);
    CHECK(a.replicates[0].cost_units == cost_ml(3, 3, 1));
    CHECK(a.total_cost_units == cost_ml(3, 3, 20));

    const TargetModel flat = gaussian1d(0, 1);
    const EstimateReport f = sfs_multilevel(flat, 1, 4, 2000, identity_phi(), 32);
    CHECK(ks_normal_p(first_coordinate(f)) > 0.01);

    const EstimateReport m = sfs_multilevel(g, 1, 4, 2000, identity_phi(), 33);
    CHECK(std::abs(m.mean[0] - 1.0) < 0.2);
    CHECK_THROWS((void)sfs_multilevel(g, 3, 2, 10, identity_phi(), 1));
  }

  TEST_CASE("alternative estimator runs and counts") {
    const TargetModel g = gaussian1d(1, 2);
    const LevelDistribution lv(1, 3);
    const PrecisionDistribution pd(2, 4, 4, lv);
    const EstimateReport r = sfs_unbiased_alt(g, lv, pd, 200, identity_phi(), McmcConfig{1.5, 64, 50, 1}, 41);
    std::uint64_t sum = 0;
    for (const auto& rep : r.replicates) {
      CHECK(std::isfinite(rep.value[0]));
      CHECK(rep.cost_units == cost_replicate(rep.level, rep.precision, rep.level == 1, rep.precision == 2, 4, 1));
      sum += rep.cost_units;
    }
    CHECK(r.total_cost_units == sum);
    CHECK(std::abs(r.mean[0] - 1.0) < 5 * r.standard_error[0] + 0.1);
  }

  TEST_CASE("spec parsing and summary") {
    CHECK(parse_estimator_kind("unbiased-alt") == EstimatorKind::UnbiasedAlt);
    CHECK(to_string(EstimatorKind::Multilevel) == "multilevel");
    CHECK_THROWS((void)parse_estimator_kind("mlmc"));
    EstimatorSpec s;
    s.kind = EstimatorKind::Single;
    CHECK(s.summary().find("level=4") != std::string::npos);
  }

  TEST_CASE("replicate csv") {
    const TargetModel g = gaussian1d(1, 2);
    const EstimateReport r = sfs_biased(g, 2, 4, 3, identity_phi(), true, 5);
    std::ostringstream os;
    write_replicates_csv(os, r, {"seed=5"});
    const std::string s = os.str();
    CHECK(s.rfind("# seed=5\nreplicate,L,P,cost_units,value_0\n0,2,-1,16,", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 5);
  }

  TEST_CASE("argument checks") {
    const TargetModel g = gaussian1d(1, 2);
    CHECK_THROWS((void)sfs_biased(g, 2, 0, 3, identity_phi(), true, 5));
    CHECK_THROWS((void)sfs_biased(g, 2, 4, 0, identity_phi(), true, 5));
  }
}
