#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <stdexcept>

namespace bcusum {

// Regression sample (y_t, x_t), t = 1..T. The first regressor column is
// the intercept and must be identically one.
struct Dataset {
  Eigen::VectorXd y;  // length T
  Eigen::MatrixXd X;  // T x k, column 0 == 1

  std::size_t T() const { return static_cast<std::size_t>(y.size()); }
  std::size_t k() const { return static_cast<std::size_t>(X.cols()); }

  void validate() const {
    if (X.rows() != y.size())
      throw std::invalid_argument("dataset: X and y row counts differ");
    if (X.cols() < 1) throw std::invalid_argument("dataset: no regressors");
    if (T() <= k())
      throw std::invalid_argument("dataset: need T > k observations");
    for (Eigen::Index t = 0; t < X.rows(); ++t)
      if (X(t, 0) != 1.0)
        throw std::invalid_argument("dataset: first column must be 1");
  }
};

}  // namespace bcusum
