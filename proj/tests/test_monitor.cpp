#include <Eigen/Dense>
#include <cmath>
#include <doctest.h>
#include <vector>

#include "bcusum/monitor.hpp"
#include "bcusum/regression.hpp"
#include "helpers.hpp"

using namespace bcusum;
using namespace bcusum_test;

namespace {

// Offline reference: recompute every monitoring value from scratch with
// least-squares refits, frozen historical normalization, and the
// definition-level window scans.
std::vector<double> offline_values(const Dataset& full, std::size_t T_hist,
                                   const MonitorConfig& cfg) {
  Dataset hist;
  hist.y = full.y.head(static_cast<Eigen::Index>(T_hist));
  hist.X = full.X.topRows(static_cast<Eigen::Index>(T_hist));
  const HistoryFit fit = fit_history(hist);
  const Eigen::VectorXd w = brute_recursive_residuals(full);
  const double scale = 1.0 / (fit.sigma_hat * std::sqrt(double(T_hist)));

  const std::size_t T_full = full.T();
  std::vector<Eigen::VectorXd> q(T_full + 1,
                                 Eigen::VectorXd::Zero(full.X.cols()));
  for (std::size_t t = 1; t <= T_full; ++t)
    q[t] = q[t - 1] +
           scale * (fit.C_inv_sqrt *
                    (full.X.row(static_cast<Eigen::Index>(t - 1)).transpose() *
                     w(static_cast<Eigen::Index>(t - 1))));

  auto shape = [&](double r) {
    if (cfg.boundary == BoundaryKind::linear) return 1.0 + 2.0 * r;
    return std::sqrt((r + 1.0) * std::log((r + 1.0) / (cfg.alpha * cfg.alpha)));
  };

  std::vector<double> values;
  for (std::size_t t = T_hist + 1; t <= T_full; ++t) {
    double value = 0.0;
    if (cfg.kind == DetectorKind::forward) {
      value = (q[t] - q[T_hist]).cwiseAbs().maxCoeff() /
              shape(double(t - T_hist) / double(T_hist));
    } else {
      for (std::size_t s = T_hist + 1; s <= t; ++s)
        value = std::max(value,
                         (q[t] - q[s - 1]).cwiseAbs().maxCoeff() /
                             shape(double(t - s + 1) / double(T_hist)));
    }
    values.push_back(value);
  }
  return values;
}

}  // namespace

TEST_CASE("online monitoring equals the offline reference on 200 streams") {
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    const std::size_t k = 1 + rep % 3;
    const std::size_t T_hist = 30;
    const std::size_t T_full = 70;
    const Dataset full = random_sample(T_full, k, 500 + rep, rep);
    Dataset hist;
    hist.y = full.y.head(T_hist);
    hist.X = full.X.topRows(T_hist);

    MonitorConfig cfg;
    cfg.kind = (rep % 2 == 0) ? DetectorKind::stacked : DetectorKind::forward;
    cfg.lambda = 1e9;  // never stop; we compare values only
    MonitorState st = MonitorState::init(hist, cfg);

    const std::vector<double> ref = offline_values(full, T_hist, cfg);
    for (std::size_t i = 0; i < T_full - T_hist; ++i) {
      const MonitorStatus s = st.step(
          full.X.row(static_cast<Eigen::Index>(T_hist + i)).transpose(),
          full.y(static_cast<Eigen::Index>(T_hist + i)));
      CHECK(std::abs(s.value - ref[i]) <= 1e-10);
    }
  }
}

TEST_CASE("state serialization round-trips exactly") {
  const Dataset hist = random_sample(40, 2, 600, 0);
  MonitorConfig cfg;
  cfg.kind = DetectorKind::stacked;
  cfg.m = 4.0;
  cfg.lambda = 2.5;
  MonitorState st = MonitorState::init(hist, cfg);

  GaussianStream g(601, 0);
  for (int i = 0; i < 25; ++i) {
    Eigen::VectorXd x(2);
    x << 1.0, g.next();
    st.step(x, 1.0 + 0.5 * x(1) + g.next());
  }

  const std::string json = st.to_json();
  MonitorState back = MonitorState::from_json(json);
  CHECK(back.to_json() == json);  // byte-identical re-serialization
  CHECK(back.t_now() == st.t_now());
  CHECK(back.T() == st.T());
  CHECK(back.lambda() == st.lambda());
  CHECK(back.running_max() == st.running_max());

  // continued streams evolve identically
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x(2);
    x << 1.0, 0.1 * i - 1.0;
    const double y = 1.0 + 0.05 * i;
    const MonitorStatus a = st.step(x, y);
    const MonitorStatus b = back.step(x, y);
    CHECK(a.value == b.value);
    CHECK(a.crossed == b.crossed);
  }
}

TEST_CASE("infinite-horizon config survives the JSON round-trip") {
  const Dataset hist = random_sample(30, 1, 602, 0);
  MonitorConfig cfg;
  cfg.kind = DetectorKind::forward;
  MonitorState st = MonitorState::init(hist, cfg);
  MonitorState back = MonitorState::from_json(st.to_json());
  CHECK(std::isinf(back.config().m));
  CHECK(back.lambda() == st.lambda());
}

TEST_CASE("a large shift triggers a stopping time that persists") {
  const Dataset hist = random_sample(50, 1, 603, 0);
  MonitorConfig cfg;
  cfg.kind = DetectorKind::stacked;
  cfg.m = 4.0;
  MonitorState st = MonitorState::init(hist, cfg);

  GaussianStream g(604, 0);
  std::optional<std::size_t> stop;
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
    const MonitorStatus s = st.step(x, 6.0 + g.next());
    if (s.crossed && !stop) stop = s.stopping_time;
    if (stop) CHECK(s.stopping_time == stop);  // first crossing is sticky
  }
  CHECK(stop.has_value());
  CHECK(*stop >= 51);
}

TEST_CASE("configuration validation") {
  const Dataset hist = random_sample(30, 2, 605, 0);
  MonitorConfig backward;
  backward.kind = DetectorKind::backward;
  CHECK_THROWS(MonitorState::init(hist, backward));

  MonitorConfig radical_multivar;
  radical_multivar.boundary = BoundaryKind::radical_chu;
  radical_multivar.kind = DetectorKind::forward;
  CHECK_THROWS(MonitorState::init(hist, radical_multivar));  // k = 2

  MonitorConfig bad_m;
  bad_m.m = 1.0;
  CHECK_THROWS(MonitorState::init(hist, bad_m));

  MonitorConfig capped;
  capped.kind = DetectorKind::stacked;
  capped.lambda = 1e9;
  capped.max_retained = 5;
  MonitorState st = MonitorState::init(hist, capped);
  bool threw = false;
  for (int i = 0; i < 10 && !threw; ++i) {
    Eigen::VectorXd x(2);
    x << 1.0, 0.3;
    try {
      st.step(x, 1.0);
    } catch (const std::exception&) {
      threw = true;
    }
  }
  CHECK(threw);

  MonitorConfig finite;
  finite.m = 1.1;  // endpoint T*m = 33
  finite.lambda = 5.0;
  MonitorState fin = MonitorState::init(hist, finite);
  for (int i = 0; i < 3; ++i)
    fin.step(Eigen::VectorXd::Ones(2), 1.0);
  CHECK_THROWS(fin.step(Eigen::VectorXd::Ones(2), 1.0));
}
