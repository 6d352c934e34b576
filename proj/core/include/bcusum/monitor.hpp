#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bcusum/critical_values.hpp"
#include "bcusum/dataset.hpp"
#include "bcusum/detectors.hpp"
#include "bcusum/regression.hpp"

namespace bcusum {

struct MonitorConfig {
  DetectorKind kind = DetectorKind::forward;  // forward or stacked
  BoundaryKind boundary = BoundaryKind::linear;
  double alpha = 0.05;
  std::optional<double> lambda;  // overrides table lookup
  double m = std::numeric_limits<double>::infinity();  // horizon endpoint m*T
  // hard cap on retained cumulative sums (stacked kind); exceeding it errors
  std::optional<std::size_t> max_retained;
};

struct MonitorStatus {
  std::size_t t = 0;
  double value = 0.0;        // detector norm / boundary shape at t
  double boundary_at_t = 0.0;
  bool crossed = false;
  std::optional<std::size_t> stopping_time;
};

// Online monitoring state for t > T. The historical normalization
// (sigma_hat, C_T^{-1/2}, T) is frozen at init; the recursive coefficient
// estimate keeps updating with every consumed observation.
class MonitorState {
 public:
  static MonitorState init(const Dataset& historical, const MonitorConfig& cfg);

  MonitorStatus step(const Eigen::VectorXd& x, double y);

  std::size_t t_now() const { return t_now_; }
  std::size_t T() const { return T_; }
  std::size_t k() const { return k_; }
  double lambda() const { return lambda_; }
  double running_max() const { return running_max_; }
  std::optional<std::size_t> stopped_at() const { return stopped_at_; }
  const MonitorConfig& config() const { return cfg_; }
  double sigma_hat() const { return sigma_hat_; }

  // versioned JSON round-trip for suspend/resume
  std::string to_json() const;
  static MonitorState from_json(const std::string& text);

 private:
  MonitorState() : rls_(1) {}

  MonitorConfig cfg_;
  double sigma_hat_ = 0.0;
  Eigen::MatrixXd c_inv_sqrt_;
  std::size_t T_ = 0;
  std::size_t k_ = 0;
  double lambda_ = 0.0;
  RlsState rls_;
  // standardized cumulative sums q_j = (sigma sqrt(T))^{-1} C^{-1/2} S_j
  // for j = T..t_now (index 0 holds q_T); the stacked scan needs them all
  std::vector<Eigen::VectorXd> qcum_;
  std::size_t t_now_ = 0;
  double running_max_ = 0.0;
  std::optional<std::size_t> stopped_at_;
};

struct MonitorReport {
  std::vector<MonitorStatus> trace;
  std::optional<std::size_t> stopping_time;
  std::optional<long> delay;  // stopping_time - true break, when both known
  double running_max = 0.0;
};

MonitorReport monitor_run(MonitorState& state,
                          const std::vector<std::pair<Eigen::VectorXd, double>>& stream,
                          std::optional<std::size_t> true_break = std::nullopt);

}  // namespace bcusum
