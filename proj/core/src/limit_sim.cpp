#include "bcusum/limit_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bcusum/parallel.hpp"

namespace bcusum {

double h_single_break(double r, const BreakSpec& spec) {
  if (r < 0.0) throw std::invalid_argument("h_single_break: r must be >= 0");
  if (r < spec.tau_star || spec.tau_star <= 0.0) return 0.0;
  return spec.c_over_sigma * spec.tau_star *
         (std::log(r) - std::log(spec.tau_star));
}

double h_general(double r, const StepFunction& g) {
  if (g.knots.empty() || g.knots.size() != g.values.size())
    throw std::invalid_argument("h_general: malformed step function");
  if (g.knots.front() != 0.0)
    throw std::invalid_argument("h_general: first knot must be 0");
  if (r < 0.0) throw std::invalid_argument("h_general: r must be >= 0");
  if (r == 0.0) return 0.0;

  // G(z) = int_0^z g; I(r) = int_0^r G(z)/z dz, both exact on segments
  double G = 0.0;   // G at segment start
  double I = 0.0;
  for (std::size_t s = 0; s < g.knots.size(); ++s) {
    const double a = g.knots[s];
    if (a >= r) break;
    const double b =
        (s + 1 < g.knots.size()) ? std::min(g.knots[s + 1], r) : r;
    const double v = g.values[s];
    if (a == 0.0) {
      I += v * b;  // G(z) = v z on the first segment
    } else {
      I += (G - v * a) * (std::log(b) - std::log(a)) + v * (b - a);
    }
    G += v * (b - a);
  }
  return G - I;
}

namespace {

// Discretized Gaussian path: values w[d][i] at times u[i], u[0] = 0,
// w[d][0] = 0. Monitoring horizons are mapped onto this form via the
// bridge/time-change identities, so every detector functional reduces to
// a statistic of (u, w).
struct LimitPath {
  std::vector<double> u;
  std::vector<std::vector<double>> w;
};

LimitPath make_path(const Horizon& hz, std::size_t nu, std::size_t n,
                    GaussianStream& g) {
  LimitPath p;
  p.w.assign(nu, {});
  if (hz.is_retro()) {
    const double step = 1.0 / static_cast<double>(n);
    const double sstep = std::sqrt(step);
    p.u.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
      p.u[i] = static_cast<double>(i) * step;
    for (std::size_t d = 0; d < nu; ++d) {
      p.w[d].assign(n + 1, 0.0);
      for (std::size_t i = 1; i <= n; ++i)
        p.w[d][i] = p.w[d][i - 1] + sstep * g.next();
    }
    return p;
  }

  // Monitoring horizons: Brownian motion on (0, m-1) realized from a
  // bridge on an equidistant r-grid of (0,1) via W(u) = B(r)/(1-r),
  // u = r/(1-r), truncated at r <= (m-1)/m (no truncation for m = inf).
  // The whole bridge is always drawn, so the path over a shorter horizon
  // is a restriction of the path over a longer one at the same (seed,
  // rep). The infinite-horizon statistic diverges (slowly) as the grid is
  // refined, so its tabulated value is tied to the grid resolution.
  std::size_t cut = n - 1;
  if (hz.kind == Horizon::Kind::fixed) {
    const double frac = (hz.m - 1.0) / hz.m;
    cut = std::min<std::size_t>(
        cut, static_cast<std::size_t>(
                 std::floor(frac * static_cast<double>(n) + 1e-9)));
    if (cut < 1) cut = 1;
  }
  std::vector<std::vector<double>> braw(nu, std::vector<double>(n + 1, 0.0));
  const double step = 1.0 / static_cast<double>(n);
  const double sstep = std::sqrt(step);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t d = 0; d < nu; ++d)
      braw[d][i] = braw[d][i - 1] + sstep * g.next();
  p.u.assign(cut + 1, 0.0);
  for (std::size_t d = 0; d < nu; ++d) p.w[d].assign(cut + 1, 0.0);
  for (std::size_t i = 1; i <= cut; ++i) {
    const double r = static_cast<double>(i) * step;
    p.u[i] = r / (1.0 - r);
    for (std::size_t d = 0; d < nu; ++d) {
      const double bridge = braw[d][i] - r * braw[d][n];
      p.w[d][i] = bridge / (1.0 - r);
    }
  }
  return p;
}

double shape_at(BoundaryKind kind, double alpha, double x) {
  if (kind == BoundaryKind::linear) return 1.0 + 2.0 * x;
  return std::sqrt((x + 1.0) * std::log((x + 1.0) / (alpha * alpha)));
}

// max_i ||w(u_i)|| / shape(u_i); optionally the first index crossing
// lambda (-1 if none).
double forward_max(const LimitPath& p, BoundaryKind shape, double alpha,
                   double lambda, long* first_cross) {
  const std::size_t n = p.u.size() - 1;
  double best = 0.0;
  long cross = -1;
  for (std::size_t i = 1; i <= n; ++i) {
    double nrm = 0.0;
    for (const auto& wd : p.w) nrm = std::max(nrm, std::abs(wd[i]));
    const double val = nrm / shape_at(shape, alpha, p.u[i]);
    if (val > best) best = val;
    if (cross < 0 && val >= lambda) cross = static_cast<long>(i);
  }
  if (first_cross) *first_cross = cross;
  return best;
}

// Backward statistic on the retrospective grid: window length u_i scans
// upward (the order in which the growing-window detector is evaluated);
// the reported crossing index is the window start n-i+1.
double backward_max(const LimitPath& p, double lambda, long* first_cross) {
  const std::size_t n = p.u.size() - 1;
  double best = 0.0;
  long cross = -1;
  for (std::size_t i = 1; i <= n; ++i) {
    double nrm = 0.0;
    for (const auto& wd : p.w) nrm = std::max(nrm, std::abs(wd[n] - wd[n - i]));
    const double val = nrm / (1.0 + 2.0 * p.u[i]);
    if (val > best) best = val;
    if (cross < 0 && val >= lambda) cross = static_cast<long>(n - i + 1);
  }
  if (first_cross) *first_cross = cross;
  return best;
}

// Double-maximum statistic: delegates to the shared pruned kernels. When a
// crossing index is requested the maximum itself is not needed by any
// caller, so the cheaper crossing-only scan runs instead.
double sbq_max(const LimitPath& p, double lambda, long* first_cross) {
  if (first_cross != nullptr) {
    *first_cross = detail::stacked_first_crossing(p.w, p.u, lambda);
    return 0.0;
  }
  return detail::stacked_max_ratio(p.w, p.u);
}

void validate_combo(DetectorKind kind, const Horizon& horizon,
                    BoundaryKind shape, std::size_t nu) {
  if (kind == DetectorKind::backward && !horizon.is_retro())
    throw std::invalid_argument(
        "the backward detector is retrospective only");
  if (shape == BoundaryKind::radical_chu) {
    if (kind != DetectorKind::forward || nu != 1 ||
        horizon.kind != Horizon::Kind::fixed)
      throw std::invalid_argument(
          "the radical boundary applies to univariate forward monitoring "
          "with a fixed endpoint only");
  }
}

double eval_max(DetectorKind kind, const LimitPath& p, BoundaryKind shape,
                double alpha) {
  switch (kind) {
    case DetectorKind::forward:
      return forward_max(p, shape, alpha,
                         std::numeric_limits<double>::infinity(), nullptr);
    case DetectorKind::backward:
      return backward_max(p, std::numeric_limits<double>::infinity(), nullptr);
    case DetectorKind::stacked:
      return sbq_max(p, 0.0, nullptr);
  }
  throw std::logic_error("unreachable");
}

void add_drift(LimitPath& p, const Horizon& horizon, const BreakSpec& spec) {
  const std::size_t n = p.u.size() - 1;
  const bool monitoring = !horizon.is_retro();
  const double h1 = monitoring ? h_single_break(1.0, spec) : 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double pos = monitoring ? 1.0 + p.u[i] : p.u[i];
    p.w[0][i] += h_single_break(pos, spec) - h1;
  }
}

}  // namespace

double simulate_limit_draw(DetectorKind kind, const GaussianGrid& grid,
                           BoundaryKind shape, double alpha,
                           GaussianStream& g) {
  validate_combo(kind, grid.horizon, shape, grid.dim);
  const LimitPath p = make_path(grid.horizon, grid.dim, grid.n_grid, g);
  return eval_max(kind, p, shape, alpha);
}

std::vector<double> simulate_draws(DetectorKind kind, std::size_t nu,
                                   const Horizon& horizon,
                                   const SimConfig& cfg) {
  validate_combo(kind, horizon, BoundaryKind::linear, nu);
  std::vector<double> draws(cfg.n_reps);
  const GaussianGrid grid{cfg.n_grid, nu, horizon};
  parallel_for(cfg.n_reps, cfg.workers, [&](std::size_t rep) {
    GaussianStream g(cfg.seed, rep);
    draws[rep] = simulate_limit_draw(kind, grid, BoundaryKind::linear, 0.0, g);
  });
  return draws;
}

double quantile_nearest_rank(std::vector<double> draws, double p) {
  if (draws.empty()) throw std::invalid_argument("quantile of empty sample");
  const std::size_t n = draws.size();
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(draws.begin(), draws.begin() + (rank - 1), draws.end());
  return draws[rank - 1];
}

double critical_value(DetectorKind kind, std::size_t nu,
                      const Horizon& horizon, double alpha,
                      const SimConfig& cfg) {
  if (cfg.n_reps < 1000)
    throw std::invalid_argument("critical_value: need n_reps >= 1000");
  return quantile_nearest_rank(simulate_draws(kind, nu, horizon, cfg),
                               1.0 - alpha);
}

CriticalValueTable make_critical_value_table(
    const std::vector<DetectorKind>& kinds, const std::vector<std::size_t>& nus,
    const std::vector<Horizon>& horizons, const std::vector<double>& alphas,
    const SimConfig& cfg) {
  CriticalValueTable table;
  table.n_grid = cfg.n_grid;
  table.n_reps = cfg.n_reps;
  table.seed = cfg.seed;
  for (const auto kind : kinds) {
    for (const auto& hz : horizons) {
      if (kind == DetectorKind::backward && !hz.is_retro()) continue;
      for (const auto nu : nus) {
        const auto draws = simulate_draws(kind, nu, hz, cfg);
        for (const double alpha : alphas) {
          table.entries.push_back(
              {kind, nu, alpha, hz,
               quantile_nearest_rank(draws, 1.0 - alpha)});
        }
      }
    }
  }
  return table;
}

double local_power(DetectorKind kind, const BreakSpec& spec,
                   const Horizon& horizon, double lambda, BoundaryKind shape,
                   double alpha, const SimConfig& cfg) {
  validate_combo(kind, horizon, shape, 1);
  if (horizon.kind == Horizon::Kind::infinite)
    throw std::invalid_argument("local_power: use a finite horizon");
  std::vector<unsigned char> hits(cfg.n_reps, 0);
  parallel_for(cfg.n_reps, cfg.workers, [&](std::size_t rep) {
    GaussianStream g(cfg.seed, rep);
    LimitPath p = make_path(horizon, 1, cfg.n_grid, g);
    add_drift(p, horizon, spec);
    hits[rep] = eval_max(kind, p, shape, alpha) >= lambda ? 1 : 0;
  });
  std::size_t total = 0;
  for (const auto h : hits) total += h;
  return static_cast<double>(total) / static_cast<double>(cfg.n_reps);
}

DelayResult local_delay(DetectorKind kind, const BreakSpec& spec,
                        double lambda, BoundaryKind shape, double alpha,
                        double m, const SimConfig& cfg) {
  const Horizon horizon = Horizon::fixed(m);
  validate_combo(kind, horizon, shape, 1);
  if (kind == DetectorKind::backward)
    throw std::invalid_argument("local_delay: monitoring kinds only");
  if (!(spec.tau_star > 1.0 && spec.tau_star < m))
    throw std::invalid_argument("local_delay: need tau* in (1, m)");

  std::vector<double> detections(cfg.n_reps,
                                 std::numeric_limits<double>::quiet_NaN());
  parallel_for(cfg.n_reps, cfg.workers, [&](std::size_t rep) {
    GaussianStream g(cfg.seed, rep);
    LimitPath p = make_path(horizon, 1, cfg.n_grid, g);
    add_drift(p, horizon, spec);
    long cross = -1;
    if (kind == DetectorKind::forward)
      forward_max(p, shape, alpha, lambda, &cross);
    else
      sbq_max(p, lambda, &cross);
    if (cross >= 0) detections[rep] = 1.0 + p.u[cross];
  });

  DelayResult res;
  res.reps = cfg.n_reps;
  double sum = 0.0;
  for (const double td : detections) {
    if (std::isnan(td)) continue;
    if (td < spec.tau_star || td > m) continue;
    sum += td - spec.tau_star;
    ++res.detected;
  }
  if (res.detected > 0) res.mean_delay = sum / static_cast<double>(res.detected);
  return res;
}

SizeHistogram size_distribution(DetectorKind kind, const Horizon& horizon,
                                double lambda, BoundaryKind shape,
                                double alpha, std::size_t n_bins,
                                const SimConfig& cfg) {
  validate_combo(kind, horizon, shape, 1);
  if (horizon.kind == Horizon::Kind::infinite)
    throw std::invalid_argument("size_distribution: use a finite horizon");

  std::vector<double> locs(cfg.n_reps,
                           std::numeric_limits<double>::quiet_NaN());
  parallel_for(cfg.n_reps, cfg.workers, [&](std::size_t rep) {
    GaussianStream g(cfg.seed, rep);
    const LimitPath p = make_path(horizon, 1, cfg.n_grid, g);
    const std::size_t n = p.u.size() - 1;
    long cross = -1;
    switch (kind) {
      case DetectorKind::forward:
        forward_max(p, shape, alpha, lambda, &cross);
        break;
      case DetectorKind::backward:
        backward_max(p, lambda, &cross);
        break;
      case DetectorKind::stacked:
        sbq_max(p, lambda, &cross);
        break;
    }
    if (cross >= 0) {
      // sample position for retrospective kinds; elapsed fraction of the
      // monitoring window otherwise (the monitoring grid is nonuniform)
      locs[rep] = horizon.is_retro()
                      ? static_cast<double>(cross) / static_cast<double>(n)
                      : p.u[static_cast<std::size_t>(cross)] /
                            (horizon.m - 1.0);
    }
  });

  SizeHistogram hist;
  hist.reps = cfg.n_reps;
  hist.mass.assign(n_bins, 0.0);
  for (const double loc : locs) {
    if (std::isnan(loc)) continue;
    auto bin = static_cast<std::size_t>(loc * static_cast<double>(n_bins));
    if (bin >= n_bins) bin = n_bins - 1;
    hist.mass[bin] += 1.0;
    ++hist.crossed;
  }
  if (hist.crossed > 0)
    for (auto& massbin : hist.mass)
      massbin /= static_cast<double>(hist.crossed);
  return hist;
}

namespace detail {

namespace {

// Prefix extrema of each path dimension, with the anchored zero included,
// used to bound every remaining pair in the pruned scans below.
struct PrefixExtrema {
  std::vector<std::vector<double>> mn, mx;

  explicit PrefixExtrema(const std::vector<std::vector<double>>& w) {
    const std::size_t nd = w.size();
    const std::size_t n = w.empty() ? 0 : w[0].size() - 1;
    mn.resize(nd);
    mx.resize(nd);
    for (std::size_t d = 0; d < nd; ++d) {
      mn[d].resize(n + 1);
      mx[d].resize(n + 1);
      mn[d][0] = mx[d][0] = w[d][0];
      for (std::size_t j = 1; j <= n; ++j) {
        mn[d][j] = std::min(mn[d][j - 1], w[d][j]);
        mx[d][j] = std::max(mx[d][j - 1], w[d][j]);
      }
    }
  }
};

}  // namespace

// The inner scan runs j downward from i-1; prefix extrema bound every
// remaining pair, and the lag divisor only grows as j decreases, so the
// scan stops once no remaining pair can beat the running maximum.
// Equivalence with the unpruned double loop is pinned by a test.
double stacked_max_ratio(const std::vector<std::vector<double>>& w,
                         const std::vector<double>& u) {
  const std::size_t n = u.size() - 1;
  const std::size_t nd = w.size();
  const PrefixExtrema ext(w);
  double best = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i; j-- > 0;) {
      const double invden = 1.0 / (1.0 + 2.0 * (u[i] - u[j]));
      double bound = 0.0;
      for (std::size_t d = 0; d < nd; ++d) {
        bound = std::max(bound, w[d][i] - ext.mn[d][j]);
        bound = std::max(bound, ext.mx[d][j] - w[d][i]);
      }
      if (bound * invden <= best) break;
      double nrm = 0.0;
      for (std::size_t d = 0; d < nd; ++d)
        nrm = std::max(nrm, std::abs(w[d][i] - w[d][j]));
      best = std::max(best, nrm * invden);
    }
  }
  return best;
}

double stacked_max_ratio_brute(const std::vector<std::vector<double>>& w,
                               const std::vector<double>& u) {
  const std::size_t n = u.size() - 1;
  double best = 0.0;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      double nrm = 0.0;
      for (const auto& wd : w) nrm = std::max(nrm, std::abs(wd[i] - wd[j]));
      best = std::max(best, nrm / (1.0 + 2.0 * (u[i] - u[j])));
    }
  return best;
}

long stacked_first_crossing(const std::vector<std::vector<double>>& w,
                            const std::vector<double>& u, double lambda) {
  const std::size_t n = u.size() - 1;
  const std::size_t nd = w.size();
  const PrefixExtrema ext(w);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i; j-- > 0;) {
      const double invden = 1.0 / (1.0 + 2.0 * (u[i] - u[j]));
      double bound = 0.0;
      for (std::size_t d = 0; d < nd; ++d) {
        bound = std::max(bound, w[d][i] - ext.mn[d][j]);
        bound = std::max(bound, ext.mx[d][j] - w[d][i]);
      }
      if (bound * invden < lambda) break;
      double nrm = 0.0;
      for (std::size_t d = 0; d < nd; ++d)
        nrm = std::max(nrm, std::abs(w[d][i] - w[d][j]));
      if (nrm * invden >= lambda) return static_cast<long>(i);
    }
  }
  return -1;
}

}  // namespace detail

}  // namespace bcusum
