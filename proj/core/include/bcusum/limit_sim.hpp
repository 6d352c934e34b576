#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "bcusum/critical_values.hpp"
#include "bcusum/detectors.hpp"
#include "bcusum/rng.hpp"

namespace bcusum {

// Discretization of the limiting Gaussian functionals.
struct GaussianGrid {
  std::size_t n_grid = 2000;
  std::size_t dim = 1;
  Horizon horizon = Horizon::retro();
};

struct SimConfig {
  std::size_t n_grid = 2000;
  std::size_t n_reps = 20000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

// Single break of standardized size c/sigma at relative location tau_star.
struct BreakSpec {
  double c_over_sigma = 0.0;
  double tau_star = 0.5;
};

// Mean-shift function for a single break:
// h(r) = (c/sigma) * tau* * (ln r - ln tau*) for r >= tau*, else 0.
double h_single_break(double r, const BreakSpec& spec);

// Piecewise-constant break function, already standardized by sigma:
// value values[i] on [knots[i], knots[i+1]), last value extends to +inf.
// knots[0] must be 0.
struct StepFunction {
  std::vector<double> knots;
  std::vector<double> values;
};

// h(r) = int_0^r g(z) dz - int_0^r G(z)/z dz with G(z) = int_0^z g,
// evaluated in closed form.
double h_general(double r, const StepFunction& g);

// One Monte Carlo draw of the limiting maximum statistic. The boundary
// shape enters lambda-free (linear d(r) = 1+2r); the radical shape is
// only valid for univariate forward monitoring with a fixed endpoint.
double simulate_limit_draw(DetectorKind kind, const GaussianGrid& grid,
                           BoundaryKind shape, double alpha,
                           GaussianStream& g);

// All replication draws, indexed by replication (deterministic in
// (seed, n_grid, n_reps) regardless of worker count).
std::vector<double> simulate_draws(DetectorKind kind, std::size_t nu,
                                   const Horizon& horizon,
                                   const SimConfig& cfg);

// nearest-rank (1-alpha) order statistic
double quantile_nearest_rank(std::vector<double> draws, double p);

double critical_value(DetectorKind kind, std::size_t nu,
                      const Horizon& horizon, double alpha,
                      const SimConfig& cfg);

struct CriticalValueEntry {
  DetectorKind kind;
  std::size_t nu;
  double alpha;
  Horizon horizon;
  double lambda;
};

struct CriticalValueTable {
  std::vector<CriticalValueEntry> entries;
  std::size_t n_grid = 0;
  std::size_t n_reps = 0;
  std::uint64_t seed = 0;
};

// Simulates one draw set per (kind, nu, horizon) and reads off all
// requested alpha quantiles from it.
CriticalValueTable make_critical_value_table(
    const std::vector<DetectorKind>& kinds, const std::vector<std::size_t>& nus,
    const std::vector<Horizon>& horizons, const std::vector<double>& alphas,
    const SimConfig& cfg);

// Rejection rate of the drifted limiting functional against lambda
// (univariate mean-shift analysis).
double local_power(DetectorKind kind, const BreakSpec& spec,
                   const Horizon& horizon, double lambda, BoundaryKind shape,
                   double alpha, const SimConfig& cfg);

struct DelayResult {
  double mean_delay = 0.0;  // E[T_d/T | tau* <= T_d/T <= m] - tau*
  std::size_t detected = 0;
  std::size_t reps = 0;
};

// Mean local relative delay for monitoring detectors (tau* in (1, m)).
DelayResult local_delay(DetectorKind kind, const BreakSpec& spec,
                        double lambda, BoundaryKind shape, double alpha,
                        double m, const SimConfig& cfg);

struct SizeHistogram {
  std::vector<double> mass;  // sums to 1 over crossed draws
  std::size_t crossed = 0;
  std::size_t reps = 0;
};

// Distribution of the first boundary exceedance location under the null,
// conditional on rejection. Locations are normalized to [0,1] over the
// scan domain (sample position for retrospective kinds, elapsed fraction
// of the monitoring window otherwise).
SizeHistogram size_distribution(DetectorKind kind, const Horizon& horizon,
                                double lambda, BoundaryKind shape,
                                double alpha, std::size_t n_bins,
                                const SimConfig& cfg);

namespace detail {

// Double-maximum ratio max_{0<=j<i<=n} max-norm(w[:,i]-w[:,j]) / (1+2(u_i-u_j))
// over a path w (per-dimension values, index 0 anchored at 0) on strictly
// increasing times u (u[0] = 0). The pruned scan and the brute-force
// reference are algebraically identical; a test pins their agreement.
double stacked_max_ratio(const std::vector<std::vector<double>>& w,
                         const std::vector<double>& u);
double stacked_max_ratio_brute(const std::vector<std::vector<double>>& w,
                               const std::vector<double>& u);

// Smallest i such that some j < i satisfies
// max-norm(w[:,i]-w[:,j]) >= lambda * (1+2(u_i-u_j)); -1 if none.
long stacked_first_crossing(const std::vector<std::vector<double>>& w,
                            const std::vector<double>& u, double lambda);

}  // namespace detail

}  // namespace bcusum
