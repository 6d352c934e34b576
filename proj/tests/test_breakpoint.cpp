#include <Eigen/Dense>
#include <cmath>
#include <doctest.h>
#include <vector>

#include "bcusum/breakpoint.hpp"
#include "helpers.hpp"

using namespace bcusum;
using namespace bcusum_test;

TEST_CASE("scaled backward path on the hand-checked sample") {
  // sum_{j=t..T} x_j w_j = (0 + sqrt2 + 0) truncated; division by
  // sqrt(T-t+1) gives (sqrt(2/3), 1, 0)
  const Eigen::MatrixXd bs = scaled_backward_path(fit_history(tiny_sample()));
  CHECK(bs(0, 0) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  CHECK(bs(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bs(2, 0) == doctest::Approx(0.0).epsilon(1e-12));

  const BreakEstimate est = estimate_break_bq(fit_history(tiny_sample()));
  CHECK(est.t_hat == 2);
  CHECK(est.tau_hat == doctest::Approx(2.0 / 3.0));
  CHECK_FALSE(est.tau_hat_detection.has_value());
}

TEST_CASE("least-squares split estimator matches brute-force refits") {
  // frozen from an independent numpy implementation on the fixed sample
  const BreakEstimate est = estimate_break_ml(fixed_sample());
  CHECK(est.t_hat == 5);
  CHECK(est.tau_hat == doctest::Approx(5.0 / 12.0));

  // argmax of the backward scan agrees with a direct evaluation
  const BreakEstimate bq = estimate_break_bq(fit_history(fixed_sample()));
  CHECK(bq.t_hat == 7);
}

TEST_CASE("split_rss equals per-segment least squares") {
  const Dataset d = random_sample(60, 2, 101, 0);
  std::vector<double> s1, s2;
  split_rss(d, 3, 57, s1, s2);
  for (std::size_t t = 3; t <= 57; ++t) {
    CHECK(s1[t] == doctest::Approx(segment_rss(d, 1, t)).epsilon(1e-9));
    CHECK(s2[t] == doctest::Approx(segment_rss(d, t + 1, 60)).epsilon(1e-9));
  }
  CHECK_THROWS(split_rss(d, 2, 57, s1, s2));   // first segment underdetermined
  CHECK_THROWS(split_rss(d, 3, 58, s1, s2));   // second segment underdetermined
}

TEST_CASE("both estimators localize an injected mean shift") {
  Dataset d = random_sample(200, 1, 202, 3);
  for (Eigen::Index t = 120; t < 200; ++t) d.y(t) += 3.0;

  const BreakEstimate ml = estimate_break_ml(d);
  const BreakEstimate bq = estimate_break_bq(fit_history(d));
  CHECK(std::abs(static_cast<long>(ml.t_hat) - 120) <= 2);
  CHECK(std::abs(static_cast<long>(bq.t_hat) - 121) <= 3);
}

TEST_CASE("estimators are invariant to affine response transforms") {
  Dataset base = random_sample(150, 2, 303, 0);
  for (Eigen::Index t = 90; t < 150; ++t) base.y(t) += 2.0;
  Dataset scaled = base;
  Eigen::VectorXd c(2);
  c << 1.0, -0.4;
  scaled.y = -2.5 * base.y + base.X * c;

  CHECK(estimate_break_ml(base).t_hat == estimate_break_ml(scaled).t_hat);
  CHECK(estimate_break_bq(fit_history(base)).t_hat ==
        estimate_break_bq(fit_history(scaled)).t_hat);
}

TEST_CASE("monitoring context restricts the scan and dual-normalizes tau") {
  Dataset d = random_sample(120, 1, 404, 1);
  for (Eigen::Index t = 100; t < 120; ++t) d.y(t) += 4.0;

  const BreakContext ctx = BreakContext::monitor(80, 120);
  const BreakEstimate ml = estimate_break_ml(d, ctx);
  CHECK(ml.t_hat > 80);
  CHECK(ml.tau_hat == doctest::Approx(double(ml.t_hat) / 80.0));
  REQUIRE(ml.tau_hat_detection.has_value());
  CHECK(*ml.tau_hat_detection == doctest::Approx(double(ml.t_hat) / 120.0));

  const BreakEstimate bq = estimate_break_bq(fit_history(d), ctx);
  CHECK(bq.t_hat > 80);

  // fit length must equal the claimed detection time
  CHECK_THROWS(estimate_break_ml(d, BreakContext::monitor(80, 110)));
  CHECK_THROWS(estimate_break_ml(d, BreakContext::monitor(120, 120)));
}

TEST_CASE("segment_rss input validation") {
  const Dataset d = fixed_sample();
  CHECK_THROWS(segment_rss(d, 0, 5));
  CHECK_THROWS(segment_rss(d, 3, 13));
  CHECK_THROWS(segment_rss(d, 6, 5));
  CHECK_THROWS(segment_rss(d, 6, 6));  // shorter than k
}
