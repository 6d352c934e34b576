#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bcusum/dataset.hpp"
#include "bcusum/rng.hpp"

namespace bcusum_test {

// Fixed 12-observation sample with one slope regressor. All reference
// values frozen in the tests below were computed independently with
// ordinary least-squares refits at every step (numpy.linalg.lstsq).
inline bcusum::Dataset fixed_sample() {
  const std::vector<double> x1 = {0.3, -1.2, 0.7,  1.5, -0.4, 0.9,
                                  -2.1, 0.2, 1.1, -0.6, 0.5, -1.8};
  const std::vector<double> y = {1.1, -0.3, 2.0,  2.9, 0.6, 1.8,
                                 -1.7, 1.0, 2.6,  0.2, 1.4, -1.5};
  bcusum::Dataset d;
  d.y = Eigen::Map<const Eigen::VectorXd>(y.data(), 12);
  d.X = Eigen::MatrixXd::Ones(12, 2);
  for (int t = 0; t < 12; ++t) d.X(t, 1) = x1[static_cast<std::size_t>(t)];
  return d;
}

// Three observations on an intercept-only design; every quantity is
// computable by hand (w = (0, sqrt 2, 0), sigma_hat = 2/sqrt 3).
inline bcusum::Dataset tiny_sample() {
  bcusum::Dataset d;
  d.y = Eigen::Vector3d(0.0, 2.0, 1.0);
  d.X = Eigen::MatrixXd::Ones(3, 1);
  return d;
}

// Random stable regression sample, deterministic in (seed, rep).
inline bcusum::Dataset random_sample(std::size_t T, std::size_t k,
                                     std::uint64_t seed, std::uint64_t rep) {
  bcusum::GaussianStream g(seed, rep);
  bcusum::Dataset d;
  d.y.resize(static_cast<Eigen::Index>(T));
  d.X = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(T),
                              static_cast<Eigen::Index>(k));
  for (std::size_t t = 0; t < T; ++t) {
    double mean = 1.0;
    for (std::size_t j = 1; j < k; ++j) {
      const double x = g.next();
      d.X(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = x;
      mean += 0.5 * x;
    }
    d.y(static_cast<Eigen::Index>(t)) = mean + g.next();
  }
  return d;
}

// Recursive residuals by brute force: a fresh least-squares solve on all
// prior observations at every step (reference for the rank-one updates).
inline Eigen::VectorXd brute_recursive_residuals(const bcusum::Dataset& d) {
  const Eigen::Index T = d.y.size();
  const Eigen::Index k = d.X.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(T);
  for (Eigen::Index t = k; t < T; ++t) {
    const Eigen::MatrixXd Xp = d.X.topRows(t);
    const Eigen::VectorXd beta =
        (Xp.transpose() * Xp).ldlt().solve(Xp.transpose() * d.y.head(t));
    const Eigen::MatrixXd Minv = (Xp.transpose() * Xp).inverse();
    const Eigen::VectorXd x = d.X.row(t).transpose();
    w(t) = (d.y(t) - x.dot(beta)) /
           std::sqrt(1.0 + x.dot(Minv * x));
  }
  return w;
}

}  // namespace bcusum_test
