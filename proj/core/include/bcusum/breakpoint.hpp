#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <vector>

#include "bcusum/dataset.hpp"
#include "bcusum/regression.hpp"

namespace bcusum {

enum class BreakMethod { ml, bq };

struct BreakContext {
  bool monitoring = false;
  std::size_t T_hist = 0;  // historical sample length (monitoring only)
  std::size_t T_d = 0;     // detection time (monitoring only)

  static BreakContext retrospective() { return {}; }
  static BreakContext monitor(std::size_t T_hist, std::size_t T_d) {
    return {true, T_hist, T_d};
  }
};

struct BreakEstimate {
  std::size_t t_hat = 0;     // estimated break index
  double tau_hat = 0.0;      // t_hat / T (retrospective) or t_hat / T_hist
  // t_hat / T_d; the normalization used for monitoring convergence checks
  std::optional<double> tau_hat_detection;
  BreakMethod method = BreakMethod::bq;
};

// BS_{t,T} = (T-t+1)^{-1/2} C_T^{-1/2} sum_{j=t..T} x_j w_j, rows t=1..T.
Eigen::MatrixXd scaled_backward_path(const HistoryFit& fit);

// argmax_t ||BS_{t,T}|| over the admissible range, smallest index on ties.
// For monitoring, fit must cover 1..T_d and the argmax runs over
// T_hist < t <= T_d.
BreakEstimate estimate_break_bq(const HistoryFit& fit,
                                const BreakContext& ctx = {});

// RSS-split estimator: argmin_t S1(t) + S2(t) with both segment fits
// defined (t in [k+1, T-k-1] retrospectively).
BreakEstimate estimate_break_ml(const Dataset& data,
                                const BreakContext& ctx = {});

// Residual sum of squares of an OLS fit on rows [first, last] (1-based,
// inclusive). Shared with the sup-Wald benchmark.
double segment_rss(const Dataset& data, std::size_t first, std::size_t last);

// Fills s1[t] = RSS over rows 1..t and s2[t] = RSS over rows t+1..T for
// every split t in [lo, hi], via one prefix and one suffix pass over the
// incremental normal equations. Requires k+1 <= lo <= hi <= T-k-1 so both
// segment fits are defined. Vectors are sized T+1 and indexed by t.
void split_rss(const Dataset& data, std::size_t lo, std::size_t hi,
               std::vector<double>& s1, std::vector<double>& s2);

}  // namespace bcusum
