#include "bcusum/regression.hpp"

#include <cmath>
#include <stdexcept>

namespace bcusum {

void RlsState::refactor() {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  lu.setThreshold(1e-10);
  if (lu.isInvertible()) {
    M_inv = lu.inverse();
    rank_ok = true;
  } else {
    rank_ok = false;
  }
  steps_since_refactor = 0;
}

double recursive_residual_step(RlsState& state, const Eigen::VectorXd& x,
                               double y) {
  const std::size_t k = state.k();
  if (static_cast<std::size_t>(x.size()) != k)
    throw std::invalid_argument("recursive_residual_step: dimension mismatch");

  double w = 0.0;
  if (state.t >= k && state.rank_ok) {
    const Eigen::VectorXd Minv_x = state.M_inv * x;
    const double pred = Minv_x.dot(state.v);  // x' M^{-1} v = x' beta_{t-1}
    const double denom = 1.0 + x.dot(Minv_x);
    w = (y - pred) / std::sqrt(denom);
  }

  // absorb (x, y)
  state.M.noalias() += x * x.transpose();
  state.v.noalias() += x * y;
  state.t += 1;
  if (!state.rank_ok || ++state.steps_since_refactor >= RlsState::kRefactorEvery) {
    state.refactor();
  } else {
    // Sherman-Morrison: (M + xx')^{-1} = M^{-1} - M^{-1}xx'M^{-1}/(1 + x'M^{-1}x)
    const Eigen::VectorXd u = state.M_inv * x;
    state.M_inv.noalias() -= u * u.transpose() / (1.0 + x.dot(u));
  }
  return w;
}

HistoryFit fit_history(const Dataset& data) {
  data.validate();
  const std::size_t T = data.T();
  const std::size_t k = data.k();
  if (T <= k + 1)
    throw std::invalid_argument("fit_history: need T > k+1 observations");

  HistoryFit fit;
  fit.T = T;
  fit.k = k;
  fit.w = Eigen::VectorXd::Zero(T);
  fit.xw = Eigen::MatrixXd::Zero(T, k);
  fit.first_valid = 0;

  RlsState state(k);
  for (std::size_t t = 1; t <= T; ++t) {
    const Eigen::VectorXd x = data.X.row(t - 1).transpose();
    const bool defined = state.t >= k && state.rank_ok;
    const double w = recursive_residual_step(state, x, data.y(t - 1));
    fit.w(t - 1) = w;
    fit.xw.row(t - 1) = (x * w).transpose();
    if (fit.first_valid == 0 && defined) fit.first_valid = t;
  }
  if (!state.rank_ok)
    throw std::runtime_error("fit_history: design matrix is singular");

  const double wbar = fit.w.mean();
  const double ssq = (fit.w.array() - wbar).square().sum();
  const double sigma2 = ssq / static_cast<double>(T - k - 1);
  if (sigma2 <= 0.0)
    throw std::runtime_error("fit_history: zero residual variance (exact fit)");
  fit.sigma_hat = std::sqrt(sigma2);

  fit.C_T = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t t = 0; t < T; ++t) {
    const Eigen::VectorXd x = data.X.row(t).transpose();
    fit.C_T.noalias() += x * x.transpose();
  }
  fit.C_T /= static_cast<double>(T);
  fit.C_inv_sqrt = inverse_sqrt_symmetric(fit.C_T);
  fit.final_state = state;
  return fit;
}

Eigen::MatrixXd inverse_sqrt_symmetric(const Eigen::MatrixXd& A, double tol) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("inverse_sqrt_symmetric: matrix not square");
  const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol * std::max(1.0, A.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("inverse_sqrt_symmetric: matrix not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  const Eigen::VectorXd evals = es.eigenvalues();
  const double max_ev = evals.maxCoeff();
  if (max_ev <= 0.0 || evals.minCoeff() <= tol * max_ev)
    throw std::runtime_error("ill-conditioned second-moment matrix");

  const Eigen::VectorXd inv_sqrt = evals.array().rsqrt();
  return es.eigenvectors() * inv_sqrt.asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace bcusum
