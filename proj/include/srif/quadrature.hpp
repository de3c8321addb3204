// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace srif::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of the
// orthogonal-polynomial recurrence, weights come from the first component
// of the eigenvectors.
inline Rule golub_welsch(const Eigen::VectorXd& offdiag, double weight_sum) {
  const int n = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    jacobi(i, i + 1) = offdiag(i);
    jacobi(i + 1, i) = offdiag(i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = weight_sum * v0 * v0;
  }
  return rule;
}

}  // namespace detail

/// Gauss-Legendre rule on [-1, 1].
inline Rule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1 required");
  Eigen::VectorXd off(n - 1);
  for (int i = 1; i < n; ++i)
    off(i - 1) = i / std::sqrt(4.0 * i * i - 1.0);
  return detail::golub_welsch(off, 2.0);
}

/// Gauss-Legendre rule mapped to [a, b].
inline Rule gauss_legendre(int n, double a, double b) {
  Rule rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

/// Gauss-Hermite rule for weight exp(-t^2) on the real line.
inline Rule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n >= 1 required");
  Eigen::VectorXd off(n - 1);
  for (int i = 1; i < n; ++i) off(i - 1) = std::sqrt(0.5 * i);
  return detail::golub_welsch(off, std::sqrt(M_PI));
}

}  // namespace srif::quad
