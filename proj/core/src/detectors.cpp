#include "bcusum/detectors.hpp"

#include <cmath>
#include <stdexcept>

#include "bcusum/critical_values.hpp"

namespace bcusum {

std::string to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::forward: return "forward";
    case DetectorKind::backward: return "backward";
    case DetectorKind::stacked: return "stacked";
  }
  return "?";
}

std::string to_string(BoundaryKind kind) {
  return kind == BoundaryKind::linear ? "linear" : "radical";
}

DetectorKind detector_kind_from_string(const std::string& s) {
  if (s == "forward" || s == "q") return DetectorKind::forward;
  if (s == "backward" || s == "bq") return DetectorKind::backward;
  if (s == "stacked" || s == "sbq") return DetectorKind::stacked;
  throw std::invalid_argument("unknown detector kind: " + s);
}

BoundaryKind boundary_kind_from_string(const std::string& s) {
  if (s == "linear") return BoundaryKind::linear;
  if (s == "radical" || s == "radical_chu") return BoundaryKind::radical_chu;
  throw std::invalid_argument("unknown boundary kind: " + s);
}

namespace {

// d(r) strictly increasing, d(0) > 0, sup sqrt(r+1)/d(r) < infinity;
// checked on a coarse grid at construction.
void check_boundary_shape(const Boundary& b) {
  double prev = b.shape(0.0);
  if (!(prev > 0.0)) throw std::invalid_argument("boundary: d(0) must be > 0");
  for (int i = 1; i <= 400; ++i) {
    const double r = 0.05 * i;  // up to r = 20
    const double cur = b.shape(r);
    if (!(cur > prev))
      throw std::invalid_argument("boundary: d(r) must be strictly increasing");
    if (std::sqrt(r + 1.0) / cur > 1e6)
      throw std::invalid_argument("boundary: sqrt(r+1)/d(r) unbounded");
    prev = cur;
  }
}

}  // namespace

Boundary Boundary::linear(double lambda) {
  Boundary b;
  b.kind = BoundaryKind::linear;
  b.lambda = lambda;
  check_boundary_shape(b);
  return b;
}

Boundary Boundary::radical(double alpha) {
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("boundary: alpha must be in (0,1)");
  Boundary b;
  b.kind = BoundaryKind::radical_chu;
  b.alpha = alpha;
  check_boundary_shape(b);
  return b;
}

double Boundary::shape(double r) const {
  if (r < 0.0) throw std::invalid_argument("boundary: r must be >= 0");
  if (kind == BoundaryKind::linear) return 1.0 + 2.0 * r;
  return std::sqrt((r + 1.0) * std::log((r + 1.0) / (alpha * alpha)));
}

CusumPath cusum_path(const HistoryFit& fit) {
  CusumPath path;
  path.T = fit.T;
  path.nu = fit.k;
  path.q = Eigen::MatrixXd::Zero(fit.T + 1, fit.k);
  const double scale = 1.0 / (fit.sigma_hat * std::sqrt(double(fit.T)));
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(fit.k);
  for (std::size_t t = 1; t <= fit.T; ++t) {
    acc += scale * (fit.xw.row(t - 1) * fit.C_inv_sqrt);
    path.q.row(t) = acc;
  }
  return path;
}

CusumPath partial_project(const CusumPath& path, const Eigen::MatrixXd& H) {
  if (static_cast<std::size_t>(H.rows()) != path.nu)
    throw std::invalid_argument("partial_project: H row count != k");
  if (H.cols() > H.rows())
    throw std::invalid_argument("partial_project: need l <= k");
  const Eigen::MatrixXd gram = H.transpose() * H;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(H.cols(), H.cols());
  if ((gram - eye).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("partial_project: columns not orthonormal");

  CusumPath out;
  out.T = path.T;
  out.nu = static_cast<std::size_t>(H.cols());
  out.q = path.q * H;
  return out;
}

namespace {

void require_linear_for(const Boundary& b, const char* what) {
  if (b.kind != BoundaryKind::linear)
    throw std::invalid_argument(std::string("the radical boundary is only "
                                            "available for univariate forward "
                                            "monitoring, not for ") + what);
}

}  // namespace

TestReport forward_max_stat(const CusumPath& path, const Boundary& b,
                            bool keep_trace) {
  require_linear_for(b, "retrospective testing");
  TestReport rep;
  rep.detector = DetectorKind::forward;
  rep.lambda = b.threshold();
  const double T = static_cast<double>(path.T);
  for (std::size_t t = 1; t <= path.T; ++t) {
    const double d = b.shape(static_cast<double>(t) / T);
    const double val = max_norm(path.q.row(t)) / d;
    if (val > rep.statistic) rep.statistic = val;
    if (!rep.first_crossing && val >= rep.lambda) rep.first_crossing = t;
    if (keep_trace) rep.per_t.emplace_back(max_norm(path.q.row(t)), rep.lambda * d);
  }
  rep.reject = rep.statistic >= rep.lambda;
  return rep;
}

TestReport backward_max_stat(const CusumPath& path, const Boundary& b,
                             bool keep_trace) {
  require_linear_for(b, "retrospective testing");
  TestReport rep;
  rep.detector = DetectorKind::backward;
  rep.lambda = b.threshold();
  const double T = static_cast<double>(path.T);
  const Eigen::RowVectorXd end = path.q.row(path.T);
  for (std::size_t t = 1; t <= path.T; ++t) {
    const double d = b.shape(static_cast<double>(path.T - t + 1) / T);
    const double val = max_norm(end - path.q.row(t - 1)) / d;
    if (val > rep.statistic) rep.statistic = val;
    if (!rep.first_crossing && val >= rep.lambda) rep.first_crossing = t;
    if (keep_trace)
      rep.per_t.emplace_back(max_norm(end - path.q.row(t - 1)), rep.lambda * d);
  }
  rep.reject = rep.statistic >= rep.lambda;
  return rep;
}

TestReport stacked_max_stat(const CusumPath& path, const Boundary& b,
                            bool keep_trace) {
  require_linear_for(b, "retrospective testing");
  TestReport rep;
  rep.detector = DetectorKind::stacked;
  rep.lambda = b.threshold();
  const double T = static_cast<double>(path.T);
  for (std::size_t t = 1; t <= path.T; ++t) {
    double best_t = 0.0;
    std::size_t best_t_boundary_span = 0;
    bool crossed_at_t = false;
    // smallest s (largest span) wins on crossing ties at this t
    for (std::size_t s = 1; s <= t; ++s) {
      const double d = b.shape(static_cast<double>(t - s + 1) / T);
      const double val = max_norm(path.q.row(t) - path.q.row(s - 1)) / d;
      if (val > best_t) best_t = val;
      if (!crossed_at_t && val >= rep.lambda) {
        crossed_at_t = true;
        best_t_boundary_span = s;
      }
    }
    (void)best_t_boundary_span;
    if (best_t > rep.statistic) rep.statistic = best_t;
    if (!rep.first_crossing && crossed_at_t) rep.first_crossing = t;
    if (keep_trace) rep.per_t.emplace_back(best_t, rep.lambda);
  }
  rep.reject = rep.statistic >= rep.lambda;
  return rep;
}

TestReport retrospective_test(const Dataset& data, const DetectorConfig& cfg) {
  const HistoryFit fit = fit_history(data);
  CusumPath path = cusum_path(fit);
  if (cfg.H) path = partial_project(path, *cfg.H);

  if (cfg.boundary == BoundaryKind::radical_chu)
    throw std::invalid_argument(
        "the radical boundary is only available for univariate forward "
        "monitoring");

  double lambda;
  if (cfg.lambda) {
    lambda = *cfg.lambda;
  } else {
    const auto looked =
        lookup_critical_value(cfg.kind, path.nu, cfg.alpha, Horizon::retro());
    if (!looked)
      throw std::runtime_error(
          "no tabulated critical value for this (detector, nu, alpha); pass "
          "an explicit lambda or simulate one");
    lambda = *looked;
  }
  const Boundary b = Boundary::linear(lambda);

  switch (cfg.kind) {
    case DetectorKind::forward: return forward_max_stat(path, b, cfg.keep_trace);
    case DetectorKind::backward: return backward_max_stat(path, b, cfg.keep_trace);
    case DetectorKind::stacked: return stacked_max_stat(path, b, cfg.keep_trace);
  }
  throw std::logic_error("unreachable");
}

}  // namespace bcusum
