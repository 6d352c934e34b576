#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <vector>

#include "bcusum/detectors.hpp"
#include "bcusum/limit_sim.hpp"
#include "bcusum/monitor.hpp"
#include "bcusum/regression.hpp"
#include "bcusum/rng.hpp"

using namespace bcusum;

namespace {

Dataset make_data(std::size_t T, std::size_t k, std::uint64_t seed) {
  GaussianStream g(seed, 0);
  Dataset d;
  d.y.resize(static_cast<Eigen::Index>(T));
  d.X = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(T),
                              static_cast<Eigen::Index>(k));
  for (std::size_t t = 0; t < T; ++t) {
    double mean = 1.0;
    for (std::size_t j = 1; j < k; ++j) {
      const double x = g.next();
      d.X(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = x;
      mean += 0.5 * x;
    }
    d.y(static_cast<Eigen::Index>(t)) = mean + g.next();
  }
  return d;
}

void BM_FitHistory(benchmark::State& state) {
  const Dataset d = make_data(static_cast<std::size_t>(state.range(0)),
                              static_cast<std::size_t>(state.range(1)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit_history(d));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitHistory)->Args({100, 1})->Args({500, 1})->Args({500, 4});

void BM_RetrospectiveStats(benchmark::State& state) {
  const CusumPath p = cusum_path(fit_history(
      make_data(static_cast<std::size_t>(state.range(0)), 2, 2)));
  const Boundary b = Boundary::linear(1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_max_stat(p, b).statistic);
    benchmark::DoNotOptimize(backward_max_stat(p, b).statistic);
    benchmark::DoNotOptimize(stacked_max_stat(p, b).statistic);
  }
}
BENCHMARK(BM_RetrospectiveStats)->Arg(100)->Arg(500);

void BM_StackedScanPruned(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  GaussianStream g(3, 0);
  std::vector<std::vector<double>> w(1, std::vector<double>(n + 1, 0.0));
  std::vector<double> u(n + 1, 0.0);
  const double step = 1.0 / static_cast<double>(n);
  for (std::size_t i = 1; i <= n; ++i) {
    u[i] = u[i - 1] + step;
    w[0][i] = w[0][i - 1] + std::sqrt(step) * g.next();
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(detail::stacked_max_ratio(w, u));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StackedScanPruned)->Arg(2000)->Arg(10000);

void BM_LimitDraw(benchmark::State& state) {
  GaussianGrid grid;
  grid.n_grid = static_cast<std::size_t>(state.range(0));
  grid.dim = 1;
  grid.horizon = state.range(1) ? Horizon::infinite() : Horizon::retro();
  std::uint64_t rep = 0;
  for (auto _ : state) {
    GaussianStream g(7, rep++);
    benchmark::DoNotOptimize(simulate_limit_draw(
        DetectorKind::stacked, grid, BoundaryKind::linear, 0.05, g));
  }
}
BENCHMARK(BM_LimitDraw)->Args({2000, 0})->Args({10000, 1});

void BM_MonitorStep(benchmark::State& state) {
  const Dataset hist = make_data(100, 2, 5);
  MonitorConfig cfg;
  cfg.kind = DetectorKind::forward;
  cfg.lambda = 1e9;
  MonitorState st = MonitorState::init(hist, cfg);
  GaussianStream g(6, 0);
  Eigen::VectorXd x(2);
  for (auto _ : state) {
    x << 1.0, g.next();
    benchmark::DoNotOptimize(st.step(x, 2.0 + g.next()));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MonitorStep);

}  // namespace

BENCHMARK_MAIN();
