// Copyright 2026 The wmsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wmsim/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/legendre.hpp>

#include "wmsim/error.hpp"

namespace wmsim {
namespace {

QuadratureRule reference_legendre(int n) {
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // boost returns the non-negative zeros in ascending order.
  const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(n);
  QuadratureRule rule;
  auto weight = [n](double x) {
    const double dp = boost::math::legendre_p_prime<double>(n, x);
    return 2.0 / ((1.0 - x * x) * dp * dp);
  };
  for (auto z = zeros.rbegin(); z != zeros.rend(); ++z) {
    if (*z == 0.0) continue;
    rule.nodes.push_back(-*z);
    rule.weights.push_back(weight(*z));
  }
  if (n % 2 == 1) {
    rule.nodes.push_back(0.0);
    rule.weights.push_back(weight(0.0));
  }
  for (double z : zeros) {
    if (z == 0.0) continue;
    rule.nodes.push_back(z);
    rule.weights.push_back(weight(z));
  }
  cache.emplace(n, rule);
  return rule;
}

}  // namespace

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one node");
  QuadratureRule rule = reference_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

QuadratureRule gauss_hermite_normal(int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one node");
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite
  // polynomials: zero diagonal, off-diagonal sqrt(k).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  QuadratureRule rule;
  for (int i = 0; i < n; ++i) {
    rule.nodes.push_back(solver.eigenvalues()[i]);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights.push_back(v0 * v0);
  }
  // Symmetrize against eigensolver round-off.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  cache.emplace(n, rule);
  return rule;
}

QuadratureRule meter_rule(double reach, int nodes) {
  const double half_width = 10.0 + std::abs(reach);
  return gauss_legendre(nodes, -half_width, half_width);
}

}  // namespace wmsim
