#include "bcusum/breakpoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bcusum {

Eigen::MatrixXd scaled_backward_path(const HistoryFit& fit) {
  const std::size_t T = fit.T;
  const std::size_t k = fit.k;
  Eigen::MatrixXd bs(T, k);
  Eigen::RowVectorXd tail = Eigen::RowVectorXd::Zero(k);  // sum_{j=t..T} x_j w_j
  for (std::size_t t = T; t >= 1; --t) {
    tail += fit.xw.row(t - 1);
    bs.row(t - 1) =
        (tail * fit.C_inv_sqrt) / std::sqrt(static_cast<double>(T - t + 1));
  }
  return bs;
}

namespace {

void check_monitor_ctx(const BreakContext& ctx, std::size_t T) {
  if (ctx.T_d != T)
    throw std::invalid_argument(
        "monitoring break estimation: fit/data must span 1..T_d");
  if (ctx.T_hist >= ctx.T_d)
    throw std::invalid_argument(
        "monitoring break estimation: need T_hist < T_d");
}

}  // namespace

BreakEstimate estimate_break_bq(const HistoryFit& fit,
                                const BreakContext& ctx) {
  const std::size_t T = fit.T;
  std::size_t lo = 1, hi = T;
  if (ctx.monitoring) {
    check_monitor_ctx(ctx, T);
    lo = ctx.T_hist + 1;
  }
  if (lo > hi)
    throw std::invalid_argument("estimate_break_bq: empty admissible range");

  const Eigen::MatrixXd bs = scaled_backward_path(fit);
  std::size_t best_t = lo;
  double best = -1.0;
  for (std::size_t t = lo; t <= hi; ++t) {
    const double nrm = bs.row(t - 1).cwiseAbs().maxCoeff();
    if (nrm > best) {
      best = nrm;
      best_t = t;
    }
  }

  BreakEstimate est;
  est.method = BreakMethod::bq;
  est.t_hat = best_t;
  if (ctx.monitoring) {
    est.tau_hat = static_cast<double>(best_t) / static_cast<double>(ctx.T_hist);
    est.tau_hat_detection =
        static_cast<double>(best_t) / static_cast<double>(ctx.T_d);
  } else {
    est.tau_hat = static_cast<double>(best_t) / static_cast<double>(T);
  }
  return est;
}

double segment_rss(const Dataset& data, std::size_t first, std::size_t last) {
  if (first < 1 || last > data.T() || first > last)
    throw std::invalid_argument("segment_rss: bad segment bounds");
  const std::size_t n = last - first + 1;
  const std::size_t k = data.k();
  if (n < k) throw std::invalid_argument("segment_rss: segment too short");
  const Eigen::MatrixXd Xs = data.X.middleRows(first - 1, n);
  const Eigen::VectorXd ys = data.y.segment(first - 1, n);
  const Eigen::VectorXd beta =
      (Xs.transpose() * Xs).ldlt().solve(Xs.transpose() * ys);
  return (ys - Xs * beta).squaredNorm();
}

void split_rss(const Dataset& data, std::size_t lo, std::size_t hi,
               std::vector<double>& s1, std::vector<double>& s2) {
  const std::size_t T = data.T();
  const std::size_t k = data.k();
  if (lo < k + 1 || hi + k + 1 > T || lo > hi)
    throw std::invalid_argument("split_rss: bad split range");
  s1.assign(T + 1, 0.0);
  s2.assign(T + 1, 0.0);
  // prefix pass: S1(t) via incremental normal equations
  {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(k);
    double yty = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
      const Eigen::VectorXd x = data.X.row(t - 1).transpose();
      M.noalias() += x * x.transpose();
      v.noalias() += x * data.y(t - 1);
      yty += data.y(t - 1) * data.y(t - 1);
      if (t >= lo && t <= hi) {
        const Eigen::VectorXd beta = M.ldlt().solve(v);
        s1[t] = yty - v.dot(beta);
      }
    }
  }
  // suffix pass: S2(t) = RSS over t+1..T
  {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(k);
    double yty = 0.0;
    for (std::size_t t = T; t >= 1; --t) {
      const Eigen::VectorXd x = data.X.row(t - 1).transpose();
      M.noalias() += x * x.transpose();
      v.noalias() += x * data.y(t - 1);
      yty += data.y(t - 1) * data.y(t - 1);
      const std::size_t split = t - 1;  // S2(split) uses rows t..T
      if (split >= lo && split <= hi) {
        const Eigen::VectorXd beta = M.ldlt().solve(v);
        s2[split] = yty - v.dot(beta);
      }
    }
  }
}

BreakEstimate estimate_break_ml(const Dataset& data, const BreakContext& ctx) {
  data.validate();
  const std::size_t T = data.T();
  const std::size_t k = data.k();

  std::size_t lo = k + 1;
  std::size_t hi = (T >= k + 1) ? T - k - 1 : 0;
  if (ctx.monitoring) {
    check_monitor_ctx(ctx, T);
    lo = std::max(lo, ctx.T_hist + 1);
  }
  if (lo > hi || hi == 0 || hi + k + 1 > T)
    throw std::invalid_argument(
        "estimate_break_ml: sample too small for any admissible split");

  std::vector<double> s1, s2;
  split_rss(data, lo, hi, s1, s2);

  std::size_t best_t = lo;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = lo; t <= hi; ++t) {
    const double total = s1[t] + s2[t];
    if (total < best) {
      best = total;
      best_t = t;
    }
  }

  BreakEstimate est;
  est.method = BreakMethod::ml;
  est.t_hat = best_t;
  if (ctx.monitoring) {
    est.tau_hat = static_cast<double>(best_t) / static_cast<double>(ctx.T_hist);
    est.tau_hat_detection =
        static_cast<double>(best_t) / static_cast<double>(ctx.T_d);
  } else {
    est.tau_hat = static_cast<double>(best_t) / static_cast<double>(T);
  }
  return est;
}

}  // namespace bcusum
