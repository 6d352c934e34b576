#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "bcusum/dataset.hpp"

namespace bcusum {

// Incremental least-squares state. M and v accumulate the normal
// equations; M_inv is maintained by rank-one updates with a full
// refactorization every kRefactorEvery steps to bound drift.
struct RlsState {
  static constexpr std::size_t kRefactorEvery = 64;

  std::size_t t = 0;  // observations consumed
  Eigen::MatrixXd M;  // sum of x_j x_j'
  Eigen::MatrixXd M_inv;
  Eigen::VectorXd v;  // sum of x_j y_j
  bool rank_ok = false;
  std::size_t steps_since_refactor = 0;

  explicit RlsState(std::size_t k)
      : M(Eigen::MatrixXd::Zero(k, k)),
        M_inv(Eigen::MatrixXd::Zero(k, k)),
        v(Eigen::VectorXd::Zero(k)) {}

  std::size_t k() const { return static_cast<std::size_t>(M.rows()); }

  void refactor();
};

// One recursive-residual update: the residual for observation t uses the
// fit on observations 1..t-1, then the state absorbs (x, y).
// Returns 0 while t <= k or while M is singular.
double recursive_residual_step(RlsState& state, const Eigen::VectorXd& x,
                               double y);

// Everything the standardized CUSUM path needs, frozen after construction.
struct HistoryFit {
  Eigen::VectorXd w;          // recursive residuals, length T (w_t = 0, t <= k)
  double sigma_hat = 0.0;     // residual standard deviation
  Eigen::MatrixXd C_T;        // sample second-moment matrix, k x k
  Eigen::MatrixXd C_inv_sqrt; // symmetric, C_inv_sqrt^2 == C_T^{-1}
  std::size_t first_valid = 0;
  std::size_t T = 0;
  std::size_t k = 0;
  Eigen::MatrixXd xw;         // T x k, row t-1 = x_t * w_t
  RlsState final_state{1};    // state after consuming all T observations
};

HistoryFit fit_history(const Dataset& data);

// A^{-1/2} of a symmetric positive definite matrix via eigendecomposition.
// Throws if any eigenvalue <= tol * max eigenvalue.
Eigen::MatrixXd inverse_sqrt_symmetric(const Eigen::MatrixXd& A,
                                       double tol = 1e-12);

}  // namespace bcusum
