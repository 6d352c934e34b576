#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <vector>

#include "bcusum/limit_sim.hpp"
#include "bcusum/rng.hpp"

using namespace bcusum;

TEST_CASE("single-break drift function closed form") {
  const BreakSpec spec{2.0, 0.4};
  CHECK(h_single_break(0.2, spec) == 0.0);
  CHECK(h_single_break(0.4, spec) == doctest::Approx(0.0));
  CHECK(h_single_break(0.8, spec) ==
        doctest::Approx(2.0 * 0.4 * (std::log(0.8) - std::log(0.4))));
  CHECK_THROWS(h_single_break(-0.1, spec));
}

TEST_CASE("general step-function drift against a quadrature oracle") {
  // g = 0.5 on [0,0.3), -1 on [0.3,0.6), 2 on [0.6,inf);
  // reference values from adaptive numeric double integration
  StepFunction g;
  g.knots = {0.0, 0.3, 0.6};
  g.values = {0.5, -1.0, 2.0};
  CHECK(h_general(0.2, g) == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(h_general(0.45, g) == doctest::Approx(-0.182459298648674).epsilon(1e-8));
  CHECK(h_general(0.8, g) ==
        doctest::Approx(0.07645456655792895).epsilon(1e-8));
  CHECK(h_general(1.0, g) == doctest::Approx(0.377698360832112).epsilon(1e-8));

  // a single-step g reproduces the closed-form mean-shift drift
  StepFunction single;
  single.knots = {0.0, 0.35};
  single.values = {0.0, 1.7};
  const BreakSpec spec{1.7, 0.35};
  for (const double r : {0.1, 0.35, 0.5, 0.9, 1.0})
    CHECK(h_general(r, single) ==
          doctest::Approx(h_single_break(r, spec)).epsilon(1e-12));

  StepFunction bad;
  bad.knots = {0.1, 0.5};
  bad.values = {1.0, 2.0};
  CHECK_THROWS(h_general(0.5, bad));  // first knot must be 0
}

TEST_CASE("nearest-rank quantile") {
  std::vector<double> v = {5.0, 1.0, 3.0, 2.0, 4.0};
  // ceil(p*n)-th order statistic
  CHECK(quantile_nearest_rank(v, 0.5) == 3.0);
  CHECK(quantile_nearest_rank(v, 0.95) == 5.0);
  CHECK(quantile_nearest_rank(v, 0.2) == 1.0);
  CHECK_THROWS(quantile_nearest_rank({}, 0.5));
}

TEST_CASE("pruned stacked scans equal the brute-force reference") {
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    GaussianStream g(123, rep);
    const std::size_t nu = 1 + rep % 3;
    const std::size_t n = 10 + rep % 40;
    std::vector<std::vector<double>> w(nu, std::vector<double>(n + 1, 0.0));
    std::vector<double> u(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i) {
      u[i] = u[i - 1] + 0.01 + 0.05 * std::abs(g.next());
      for (std::size_t d = 0; d < nu; ++d)
        w[d][i] = w[d][i - 1] + 0.3 * g.next();
    }
    const double pruned = detail::stacked_max_ratio(w, u);
    const double brute = detail::stacked_max_ratio_brute(w, u);
    CHECK(pruned == doctest::Approx(brute).epsilon(1e-13));

    // crossing scan: index is minimal and consistent with the maximum
    for (const double frac : {0.5, 0.9, 1.0000001}) {
      const double lambda = brute * frac;
      const long cross = detail::stacked_first_crossing(w, u, lambda);
      if (lambda > brute) {
        CHECK(cross == -1);
      } else {
        REQUIRE(cross >= 1);
        // minimality: no endpoint i' < cross admits a crossing pair
        long brute_cross = -1;
        for (std::size_t i = 1; i <= n && brute_cross < 0; ++i)
          for (std::size_t j = 0; j < i; ++j) {
            double nrm = 0.0;
            for (std::size_t d = 0; d < nu; ++d)
              nrm = std::max(nrm, std::abs(w[d][i] - w[d][j]));
            if (nrm >= lambda * (1.0 + 2.0 * (u[i] - u[j]))) {
              brute_cross = static_cast<long>(i);
              break;
            }
          }
        CHECK(cross == brute_cross);
      }
    }
  }
}

TEST_CASE("draws are bitwise deterministic across worker counts") {
  SimConfig cfg;
  cfg.n_grid = 100;
  cfg.n_reps = 64;
  cfg.seed = 5;
  auto run = [&](unsigned workers) {
    SimConfig c = cfg;
    c.workers = workers;
    return simulate_draws(DetectorKind::stacked, 2, Horizon::fixed(4.0), c);
  };
  const auto base = run(1);
  CHECK(run(2) == base);
  CHECK(run(8) == base);
}

TEST_CASE("monitoring paths nest across horizons at fixed (seed, rep)") {
  SimConfig cfg;
  cfg.n_grid = 400;
  cfg.n_reps = 8;
  cfg.seed = 77;
  // a shorter horizon restricts the scan domain, so its maximum cannot
  // exceed the longer-horizon maximum of the same replication
  const auto m2 = simulate_draws(DetectorKind::stacked, 1, Horizon::fixed(2.0),
                                 cfg);
  const auto m10 = simulate_draws(DetectorKind::stacked, 1,
                                  Horizon::fixed(10.0), cfg);
  const auto inf = simulate_draws(DetectorKind::stacked, 1,
                                  Horizon::infinite(), cfg);
  for (std::size_t i = 0; i < cfg.n_reps; ++i) {
    CHECK(m2[i] <= m10[i] + 1e-13);
    CHECK(m10[i] <= inf[i] + 1e-13);
  }
}

TEST_CASE("generated tables are monotone in alpha, nu, and horizon") {
  SimConfig cfg;
  cfg.n_grid = 300;
  cfg.n_reps = 4000;
  cfg.seed = 9;
  const CriticalValueTable table = make_critical_value_table(
      {DetectorKind::stacked}, {1, 2, 3},
      {Horizon::retro(), Horizon::fixed(2.0), Horizon::fixed(6.0)},
      {0.20, 0.10, 0.05, 0.01}, cfg);
  auto get = [&](std::size_t nu, double alpha, const Horizon& hz) {
    for (const auto& e : table.entries)
      if (e.nu == nu && e.alpha == alpha && e.horizon.label() == hz.label())
        return e.lambda;
    REQUIRE(false);
    return 0.0;
  };
  const double alphas[] = {0.20, 0.10, 0.05, 0.01};
  const Horizon hzs[] = {Horizon::retro(), Horizon::fixed(2.0),
                         Horizon::fixed(6.0)};
  for (const auto& hz : hzs)
    for (std::size_t nu = 1; nu <= 3; ++nu) {
      for (int a = 1; a < 4; ++a)
        CHECK(get(nu, alphas[a], hz) > get(nu, alphas[a - 1], hz));
      if (nu > 1) CHECK(get(nu, 0.05, hz) > get(nu - 1, 0.05, hz));
    }
  // horizon monotonicity for the monitoring entries
  for (std::size_t nu = 1; nu <= 3; ++nu)
    CHECK(get(nu, 0.05, Horizon::fixed(6.0)) >
          get(nu, 0.05, Horizon::fixed(2.0)));
}

TEST_CASE("invalid simulation requests are rejected") {
  SimConfig cfg;
  cfg.n_grid = 50;
  cfg.n_reps = 1000;
  CHECK_THROWS(simulate_draws(DetectorKind::backward, 1, Horizon::fixed(2.0),
                              cfg));
  CHECK_THROWS(local_power(DetectorKind::forward, BreakSpec{1.0, 0.5},
                           Horizon::infinite(), 1.0, BoundaryKind::linear,
                           0.05, cfg));
  CHECK_THROWS(local_delay(DetectorKind::stacked, BreakSpec{1.0, 0.5}, 1.0,
                           BoundaryKind::linear, 0.05, 4.0, cfg));
  CHECK_THROWS(local_delay(DetectorKind::backward, BreakSpec{1.0, 2.0}, 1.0,
                           BoundaryKind::linear, 0.05, 4.0, cfg));
}

TEST_CASE("size histogram masses sum to one over crossed draws") {
  SimConfig cfg;
  cfg.n_grid = 400;
  cfg.n_reps = 2000;
  cfg.seed = 31;
  const SizeHistogram h = size_distribution(
      DetectorKind::forward, Horizon::retro(), 0.6, BoundaryKind::linear,
      0.05, 10, cfg);
  CHECK(h.crossed > 0);
  double total = 0.0;
  for (const double m : h.mass) total += m;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}
