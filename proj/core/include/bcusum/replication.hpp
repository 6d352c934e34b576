#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bcusum/dataset.hpp"

namespace bcusum {

// Simulation designs for the Monte Carlo study.
//   mean_shift:  y_t = 2 + shift * 1{t >= tau* T} + u_t              (k = 1)
//   slope_shift: y_t = 2 + (1 + shift * 1{t >= tau* T}) x_t + u_t    (k = 2)
//   null_k:      y_t = 2 + u_t with k-1 extra standard-normal
//                regressors whose coefficients are zero
// with u_t and all regressors i.i.d. standard normal. The series runs
// t = 1..floor(m*T); tau* may exceed 1 for monitoring designs, and
// tau_star = 0 disables the break.
enum class DgpModel { mean_shift, slope_shift, null_k };

struct DgpSpec {
  DgpModel model = DgpModel::mean_shift;
  std::size_t k = 1;  // regressor count, null_k only
  std::size_t T = 100;
  double m = 1.0;
  double tau_star = 0.0;
  double shift = 0.8;
};

// Draws one replication; deterministic in (seed, rep).
Dataset simulate_dgp(const DgpSpec& spec, std::uint64_t seed,
                     std::uint64_t rep);

// max_{r in [r0, 1-r0]} (T - 2k) (S0 - S1(r) - S2(r)) / (S1(r) + S2(r))
// with S1/S2 the split residual sums of squares at t = floor(r T); its
// null limit is sup ||B(r)||^2 / (r (1-r)) over a Brownian bridge B.
double sup_wald(const Dataset& data, double r0 = 0.15);

// Tabulated asymptotic 5% thresholds for r0 = 0.15, k <= 4.
std::optional<double> sup_wald_critical_value(std::size_t k,
                                              double alpha = 0.05,
                                              double r0 = 0.15);

struct ReportCell {
  std::string row;
  std::string col;
  double value = 0.0;
  double se = 0.0;  // Monte Carlo standard error, same units as value
};

struct ExperimentReport {
  std::string table_id;
  std::vector<ReportCell> cells;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
};

// Cell lookup by exact row/col labels; throws if absent.
double report_value(const ExperimentReport& report, const std::string& row,
                    const std::string& col);

struct HarnessConfig {
  std::size_t reps = 20000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

// Empirical sizes of the retrospective tests at asymptotic 5% thresholds.
// Rows "Q"/"BQ"/"SBQ"; columns "k=<k>,T=<T>"; values in percentage points.
ExperimentReport run_size_table(const std::vector<std::size_t>& ks,
                                const std::vector<std::size_t>& Ts,
                                const HarnessConfig& cfg);

// Size-adjusted powers of the retrospective tests at T, in percentage
// points. Thresholds are the empirical 95th percentiles from a separate
// null run per design. Rows "tau=<tau>"; columns
// "model10:Q|BQ|SBQ|supW" and "model11:...".
ExperimentReport run_power_table(const std::vector<double>& taus,
                                 std::size_t T, const HarnessConfig& cfg);

// Empirical sizes of the monitoring detectors with infinite-horizon 5%
// thresholds, observed up to each endpoint in ms. Rows "m=<m>"; columns
// "k=<k>,T=<T>:SBQ|Q|CSW" (CSW only for k=1); percentage points.
ExperimentReport run_monitor_size_table(const std::vector<std::size_t>& ks,
                                        const std::vector<std::size_t>& Ts,
                                        const std::vector<double>& ms,
                                        const HarnessConfig& cfg);

// Mean detection delays (in observations) over the window (T, m*T] with
// size-adjusted 5% thresholds calibrated on a null run over the full
// window. Rows "tau=<tau>"; columns "model10:SBQ|Q|CSW", "model11:SBQ|Q".
ExperimentReport run_delay_table(const std::vector<double>& taus,
                                 std::size_t T, double m,
                                 const HarnessConfig& cfg);

// Bias and MSE of the breakpoint estimators under the mean-shift design.
// Rows "tau=<tau>"; columns "T=<T>:ML|BQ:bias|mse".
ExperimentReport run_break_table(const std::vector<double>& taus,
                                 const std::vector<std::size_t>& Ts,
                                 double shift, const HarnessConfig& cfg);

}  // namespace bcusum
