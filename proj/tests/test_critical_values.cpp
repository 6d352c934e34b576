#include <doctest.h>

#include "bcusum/critical_values.hpp"

using namespace bcusum;

TEST_CASE("reference critical value lookups, retrospective") {
  CHECK(*lookup_critical_value(DetectorKind::forward, 1, 0.05,
                               Horizon::retro()) == doctest::Approx(0.945));
  // forward and backward maxima share a limit law
  CHECK(*lookup_critical_value(DetectorKind::backward, 1, 0.05,
                               Horizon::retro()) == doctest::Approx(0.945));
  CHECK(*lookup_critical_value(DetectorKind::forward, 4, 0.01,
                               Horizon::retro()) == doctest::Approx(1.287));
  CHECK(*lookup_critical_value(DetectorKind::stacked, 1, 0.05,
                               Horizon::retro()) == doctest::Approx(1.198));
  CHECK(*lookup_critical_value(DetectorKind::stacked, 2, 0.01,
                               Horizon::retro()) == doctest::Approx(1.442));
  CHECK(*lookup_critical_value(DetectorKind::stacked, 8, 0.20,
                               Horizon::retro()) == doctest::Approx(1.268));
}

TEST_CASE("reference critical value lookups, monitoring") {
  CHECK(*lookup_critical_value(DetectorKind::stacked, 1, 0.05,
                               Horizon::fixed(2.0)) == doctest::Approx(1.198));
  CHECK(*lookup_critical_value(DetectorKind::stacked, 4, 0.10,
                               Horizon::fixed(10.0)) == doctest::Approx(1.500));
  CHECK(*lookup_critical_value(DetectorKind::stacked, 1, 0.05,
                               Horizon::infinite()) == doctest::Approx(1.514));
  CHECK(*lookup_critical_value(DetectorKind::stacked, 8, 0.01,
                               Horizon::infinite()) == doctest::Approx(1.807));
  CHECK(*lookup_critical_value(DetectorKind::forward, 1, 0.05,
                               Horizon::infinite()) == doctest::Approx(0.957));
  CHECK(*lookup_critical_value(DetectorKind::forward, 2, 0.05,
                               Horizon::infinite()) == doctest::Approx(1.044));
}

TEST_CASE("unknown keys return nullopt instead of guessing") {
  CHECK_FALSE(lookup_critical_value(DetectorKind::forward, 9, 0.05,
                                    Horizon::retro()));
  CHECK_FALSE(lookup_critical_value(DetectorKind::forward, 1, 0.033,
                                    Horizon::retro()));
  CHECK_FALSE(lookup_critical_value(DetectorKind::stacked, 1, 0.05,
                                    Horizon::fixed(7.0)));  // not tabulated
  CHECK_FALSE(lookup_critical_value(DetectorKind::backward, 1, 0.05,
                                    Horizon::fixed(2.0)));  // no monitoring BQ
}

TEST_CASE("horizon labels and validation") {
  CHECK(Horizon::retro().label() == "ret");
  CHECK(Horizon::fixed(2.0).label() == "m=2");
  CHECK(Horizon::infinite().label() == "inf");
  CHECK_THROWS(Horizon::fixed(1.0));
  CHECK_THROWS(Horizon::fixed(0.5));
}

TEST_CASE("tabulated values are monotone in alpha, nu, and m") {
  const double alphas[] = {0.20, 0.10, 0.05, 0.025, 0.01};
  for (std::size_t nu = 1; nu <= 8; ++nu) {
    for (int a = 1; a < 5; ++a) {
      CHECK(*lookup_critical_value(DetectorKind::forward, nu, alphas[a],
                                   Horizon::retro()) >
            *lookup_critical_value(DetectorKind::forward, nu, alphas[a - 1],
                                   Horizon::retro()));
      CHECK(*lookup_critical_value(DetectorKind::stacked, nu, alphas[a],
                                   Horizon::retro()) >
            *lookup_critical_value(DetectorKind::stacked, nu, alphas[a - 1],
                                   Horizon::retro()));
    }
    if (nu > 1)
      CHECK(*lookup_critical_value(DetectorKind::stacked, nu, 0.05,
                                   Horizon::retro()) >
            *lookup_critical_value(DetectorKind::stacked, nu - 1, 0.05,
                                   Horizon::retro()));
  }
  const double ms[] = {1.2, 1.4, 1.6, 1.8, 2.0, 3.0, 4.0, 6.0, 8.0, 10.0};
  for (std::size_t nu = 1; nu <= 8; ++nu) {
    for (int i = 1; i < 10; ++i)
      CHECK(*lookup_critical_value(DetectorKind::stacked, nu, 0.05,
                                   Horizon::fixed(ms[i])) >
            *lookup_critical_value(DetectorKind::stacked, nu, 0.05,
                                   Horizon::fixed(ms[i - 1])));
    CHECK(*lookup_critical_value(DetectorKind::stacked, nu, 0.05,
                                 Horizon::infinite()) >
          *lookup_critical_value(DetectorKind::stacked, nu, 0.05,
                                 Horizon::fixed(10.0)));
  }
}
