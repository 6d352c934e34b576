#include <cmath>
#include <doctest.h>

#include "bcusum/replication.hpp"
#include "helpers.hpp"

using namespace bcusum;
using namespace bcusum_test;

TEST_CASE("simulated designs are deterministic and break as advertised") {
  DgpSpec spec;
  spec.model = DgpModel::mean_shift;
  spec.T = 200;
  spec.tau_star = 0.5;
  spec.shift = 0.8;

  const Dataset a = simulate_dgp(spec, 7, 3);
  const Dataset b = simulate_dgp(spec, 7, 3);
  CHECK(a.y == b.y);
  CHECK(a.X == b.X);
  CHECK(a.T() == 200);
  CHECK(a.k() == 1);

  // pre-break mean 2, post-break mean 2.8; average over many replications
  double pre = 0.0, post = 0.0;
  const int reps = 200;
  for (int rep = 0; rep < reps; ++rep) {
    const Dataset d = simulate_dgp(spec, 11, static_cast<std::uint64_t>(rep));
    pre += d.y.head(100).mean();
    post += d.y.tail(100).mean();
  }
  CHECK(pre / reps == doctest::Approx(2.0).epsilon(0.02));
  CHECK(post / reps == doctest::Approx(2.8).epsilon(0.02));
}

TEST_CASE("slope-shift and null designs have the right shapes") {
  DgpSpec slope;
  slope.model = DgpModel::slope_shift;
  slope.T = 50;
  slope.tau_star = 0.5;
  const Dataset s = simulate_dgp(slope, 1, 0);
  CHECK(s.k() == 2);

  DgpSpec null4;
  null4.model = DgpModel::null_k;
  null4.k = 4;
  null4.T = 60;
  const Dataset n = simulate_dgp(null4, 1, 0);
  CHECK(n.k() == 4);
  CHECK(n.T() == 60);

  DgpSpec mon;
  mon.model = DgpModel::mean_shift;
  mon.T = 100;
  mon.m = 3.0;
  mon.tau_star = 2.0;
  CHECK(simulate_dgp(mon, 1, 0).T() == 300);
}

TEST_CASE("sup-Wald statistic against a brute-force refit oracle") {
  // frozen from an independent numpy implementation on the fixed sample
  CHECK(sup_wald(fixed_sample()) ==
        doctest::Approx(2.5547825364833963).epsilon(1e-9));

  CHECK(*sup_wald_critical_value(1) == doctest::Approx(8.85));
  CHECK(*sup_wald_critical_value(2) == doctest::Approx(11.79));
  CHECK(*sup_wald_critical_value(3) == doctest::Approx(14.15));
  CHECK(*sup_wald_critical_value(4) == doctest::Approx(16.45));
  CHECK_FALSE(sup_wald_critical_value(5));
  CHECK_FALSE(sup_wald_critical_value(1, 0.10));
}

TEST_CASE("report cell lookup") {
  ExperimentReport rep;
  rep.cells.push_back({"Q", "k=1,T=100", 3.8, 0.1});
  CHECK(report_value(rep, "Q", "k=1,T=100") == 3.8);
  CHECK_THROWS(report_value(rep, "BQ", "k=1,T=100"));
}

TEST_CASE("size table harness: labels, ranges, determinism across workers") {
  HarnessConfig cfg;
  cfg.reps = 400;
  cfg.seed = 5;
  const ExperimentReport a = run_size_table({1}, {100}, cfg);
  CHECK(a.table_id == "retro-sizes");
  CHECK(a.reps == 400);
  for (const char* row : {"Q", "BQ", "SBQ"}) {
    const double v = report_value(a, row, "k=1,T=100");
    CHECK(v >= 0.0);
    CHECK(v <= 100.0);
    CHECK(v < 15.0);  // a 5% test cannot be wildly oversized
  }
  HarnessConfig wide = cfg;
  wide.workers = 8;
  const ExperimentReport b = run_size_table({1}, {100}, wide);
  for (std::size_t i = 0; i < a.cells.size(); ++i)
    CHECK(a.cells[i].value == b.cells[i].value);
}

TEST_CASE("break table harness shrinks bias as tau moves inward") {
  HarnessConfig cfg;
  cfg.reps = 300;
  cfg.seed = 9;
  const ExperimentReport rep = run_break_table({0.5, 0.9}, {100}, 4.0, cfg);
  // with a huge shift both estimators localize nearly exactly
  CHECK(std::abs(report_value(rep, "tau=0.5", "T=100:ML:bias")) < 0.03);
  CHECK(report_value(rep, "tau=0.5", "T=100:ML:mse") < 0.01);
}
