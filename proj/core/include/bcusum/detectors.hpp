#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bcusum/dataset.hpp"
#include "bcusum/regression.hpp"

namespace bcusum {

enum class DetectorKind { forward, backward, stacked };

enum class BoundaryKind { linear, radical_chu };

std::string to_string(DetectorKind kind);
std::string to_string(BoundaryKind kind);
DetectorKind detector_kind_from_string(const std::string& s);
BoundaryKind boundary_kind_from_string(const std::string& s);

// Time-varying critical threshold b(r) = lambda * d(r).
// linear:      d(r) = 1 + 2r, threshold lambda supplied.
// radical_chu: b(r) = sqrt((r+1) ln((r+1)/alpha^2)); the significance
//              level is absorbed into the shape, so the threshold is 1.
struct Boundary {
  BoundaryKind kind = BoundaryKind::linear;
  double lambda = 0.0;  // linear kind
  double alpha = 0.0;   // radical kind

  static Boundary linear(double lambda);
  static Boundary radical(double alpha);

  // Divisor applied to the detector norm at relative time r.
  double shape(double r) const;
  // Rejection threshold for the max statistic (norm / shape).
  double threshold() const { return kind == BoundaryKind::linear ? lambda : 1.0; }
  double value(double r) const { return threshold() * shape(r); }
};

// Standardized CUSUM path: q.row(t) holds the detector vector after t
// observations, t = 0..T, q.row(0) == 0.
struct CusumPath {
  Eigen::MatrixXd q;  // (T+1) x nu
  std::size_t T = 0;
  std::size_t nu = 0;
};

CusumPath cusum_path(const HistoryFit& fit);

// Projects the path onto l orthonormal directions (partial-break test).
CusumPath partial_project(const CusumPath& path, const Eigen::MatrixXd& H);

struct TestReport {
  DetectorKind detector = DetectorKind::forward;
  double statistic = 0.0;
  double lambda = 0.0;
  bool reject = false;
  std::optional<std::size_t> first_crossing;
  // per-time (detector value, boundary value), for plotting
  std::vector<std::pair<double, double>> per_t;
};

TestReport forward_max_stat(const CusumPath& path, const Boundary& b,
                            bool keep_trace = false);
TestReport backward_max_stat(const CusumPath& path, const Boundary& b,
                             bool keep_trace = false);
TestReport stacked_max_stat(const CusumPath& path, const Boundary& b,
                            bool keep_trace = false);

struct DetectorConfig {
  DetectorKind kind = DetectorKind::forward;
  BoundaryKind boundary = BoundaryKind::linear;
  double alpha = 0.05;
  std::optional<double> lambda;     // overrides table lookup
  double m = 1.0;                   // horizon; 1 = retrospective, inf allowed
  std::optional<Eigen::MatrixXd> H; // partial-break projection
  bool keep_trace = false;
};

TestReport retrospective_test(const Dataset& data, const DetectorConfig& cfg);

// max-norm of a path row
inline double max_norm(const Eigen::RowVectorXd& v) {
  return v.cwiseAbs().maxCoeff();
}

}  // namespace bcusum
