#include <doctest.h>

#include <cmath>

#include "sfs/bench.hpp"
#include "sfs/sde.hpp"

using namespace sfs;

namespace {

DriftCallback zero_drift() {
  return [](std::span<const double>, double, std::span<double> out) {
    for (double& v : out) v = 0.0;
  };
}

}  // namespace

TEST_SUITE("sde") {
  TEST_CASE("zero drift returns x0 plus increments") {
    RngStream s(1);
    for (int level : {0, 3, 7}) {
      const BrownianGrid g = sample_brownian(s, level, 2);
      const Vec x0{0.25, -1.5};
      const Vec x = euler_path(g, zero_drift(), x0);
      Vec expect = x0;
      for (std::size_t k = 0; k < g.steps(); ++k) {
        for (std::size_t j = 0; j < 2; ++j) expect[j] = expect[j] + 0.0 * g.dt() + g.increment(k)[j];
      }
      CHECK(x == expect);
    }
  }

  TEST_CASE("constant drift") {
    RngStream s(2);
    const BrownianGrid g = sample_brownian(s, 6, 1);
    const Vec x = euler_path(g, [](std::span<const double>, double, std::span<double> out) { out[0] = 1.0; });
    CHECK(x[0] == doctest::Approx(1.0 + g.terminal()[0]).epsilon(1e-13));
  }

  TEST_CASE("drift sees grid times") {
    RngStream s(3);
    const BrownianGrid g = sample_brownian(s, 3, 1);
    std::vector<double> times;
    (void)euler_path(g, [&](std::span<const double>, double t, std::span<double> out) {
      times.push_back(t);
      out[0] = 0.0;
    });
    REQUIRE(times.size() == 8);
    for (std::size_t k = 0; k < 8; ++k) CHECK(times[k] == k / 8.0);
  }

  TEST_CASE("non-finite state throws") {
    RngStream s(4);
    const BrownianGrid g = sample_brownian(s, 2, 1);
    CHECK_THROWS_AS((void)euler_path(g, [](std::span<const double>, double, std::span<double> out) {
                      out[0] = std::nan("");
                    }),
                    NumericalError);
    CHECK_THROWS_AS((void)euler_path(g, zero_drift(), Vec{0.0, 0.0}), std::invalid_argument);
  }

  TEST_CASE("coupled pair with constant f is pure Brownian motion") {
    const TargetModel flat = gaussian1d(0, 1);
    RngStream s(5);
    for (int r = 0; r < 20; ++r) {
      const BrownianGrid g = sample_brownian(s, 5, 1);
      const GaussianPool pool = sample_pool(s, 32, 1);
      const PathPair p = coupled_pair(g, pool, flat);
      CHECK(p.fine == p.coarse);
      CHECK(p.fine == g.terminal());
    }
  }

  TEST_CASE("coupled pair difference shrinks with level") {
    const TargetModel g = gaussian1d(1, 2);
    std::vector<double> hs, v;
    for (int l = 2; l <= 7; ++l) {
      double acc = 0;
      const int reps = 2000;
      for (int r = 0; r < reps; ++r) {
        RngStream s = substream(7, static_cast<std::uint64_t>(r), "rep").substream(l, "level");
        RngStream gs = s.substream(0, "brownian"), ps = s.substream(0, "pool");
        const BrownianGrid grid = sample_brownian(gs, l, 1);
        const GaussianPool pool = sample_pool(ps, 64, 1);
        const PathPair p = coupled_pair(grid, pool, g);
        acc += (p.fine[0] - p.coarse[0]) * (p.fine[0] - p.coarse[0]);
      }
      hs.push_back(std::exp2(-l));
      v.push_back(acc / reps);
    }
    CHECK(fit_loglog_slope(hs, v).slope > 0.9);
  }

  TEST_CASE("quadruple flags and telescoping") {
    const TargetModel g = gaussian1d(1, 2);
    const RngStream root(8);
    for (int r = 0; r < 10; ++r) {
      const RngStream s = root.substream(r, "rep");
      const CoupledQuadruple q = coupled_quadruple(s, g, 4, 40, 40, false, false);
      CHECK(q.has_coarse);
      CHECK(q.has_lo);
      CHECK(q.x_fine_hi == q.x_fine_lo);
      CHECK((q.x_fine_hi[0] - q.x_coarse_hi[0]) - (q.x_fine_lo[0] - q.x_coarse_lo[0]) == 0.0);
    }
    const CoupledQuadruple a = coupled_quadruple(root, g, 0, 20, 10, true, false);
    CHECK_FALSE(a.has_coarse);
    CHECK(a.has_lo);
    CHECK(a.x_coarse_hi.empty());
    const CoupledQuadruple b = coupled_quadruple(root, g, 3, 20, 10, false, true);
    CHECK(b.has_coarse);
    CHECK_FALSE(b.has_lo);
    CHECK(b.x_fine_lo.empty());
    CHECK_THROWS((void)coupled_quadruple(root, g, 3, 10, 20, false, false));
    CHECK_THROWS((void)coupled_quadruple(root, g, 0, 10, 5, false, false));

    // the high-precision pair is the coupled pair on the same draws
    const CoupledQuadruple q = coupled_quadruple(root, g, 3, 20, 10, false, false);
    RngStream gs = root.substream(0, "brownian"), ps = root.substream(0, "pool");
    const BrownianGrid grid = sample_brownian(gs, 3, 1);
    const GaussianPool pool = sample_pool(ps, 20, 1);
    const PathPair p = coupled_pair(grid, pool, g);
    CHECK(q.x_fine_hi == p.fine);
    CHECK(q.x_coarse_hi == p.coarse);
    const PathPair lo = coupled_pair(grid, pool.prefix_view(10), g);
    CHECK(q.x_fine_lo == lo.fine);
    CHECK(q.x_coarse_lo == lo.coarse);

    QuadrupleOptions indep;
    indep.independent_subpool = true;
    const CoupledQuadruple qi = coupled_quadruple(root, g, 3, 20, 10, false, false, indep);
    CHECK(qi.x_fine_hi == q.x_fine_hi);
    CHECK(qi.x_fine_lo != q.x_fine_lo);
  }

  TEST_CASE("quadruple with constant f") {
    const TargetModel flat = gaussian1d(0, 1);
    const CoupledQuadruple q = coupled_quadruple(RngStream(9), flat, 4, 64, 32, false, false);
    CHECK(q.x_fine_hi == q.x_fine_lo);
    CHECK(q.x_coarse_hi == q.x_coarse_lo);
  }

  TEST_CASE("alternative coupling") {
    const TargetModel g = gaussian1d(1, 2);
    const McmcConfig cfg{1.5, 64, 50, 1};
    const RngStream s(10);
    const AltPair a = alt_coupled_pair(s, g, 3, 64, cfg);
    const AltPair b = alt_coupled_pair(s, g, 3, 64, cfg);
    CHECK(a.fine == b.fine);
    CHECK(a.coarse == b.coarse);
    CHECK(std::isfinite(a.fine[0]));
    CHECK_THROWS((void)alt_coupled_pair(s, g, 0, 64, cfg));

    // the coarse path is the MCMC-mean Euler path on the coarsened grid
    RngStream gs = s.substream(0, "brownian");
    const BrownianGrid grid = sample_brownian(gs, 3, 1);
    CHECK(mcmc_euler_path(s, g, coarsen(grid), 64, cfg) == a.coarse);

    // constant f: reweighting is uniform, so the fine drift is the coarse
    // chain mean rescaled, and both paths stay close to Brownian motion
    const TargetModel flat = gaussian1d(0, 1);
    const AltPair c = alt_coupled_pair(s, flat, grid, 4096, McmcConfig{2.4, 4096, 200, 1});
    CHECK(c.degenerate_weights == 0);
    CHECK(std::abs(c.fine[0] - grid.terminal()[0]) < 0.1);
    CHECK(std::abs(c.coarse[0] - grid.terminal()[0]) < 0.1);
  }
}
