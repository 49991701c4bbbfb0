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

#pragma once

#include <vector>

namespace wmsim {

/// Fixed quadrature rule: integral ~= sum_i weights[i] f(nodes[i]).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  template <typename F>
  auto integrate(F&& f) const -> decltype(f(0.0)) {
    decltype(f(0.0)) sum{};
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// n-point Gauss-Legendre rule on [a, b]. Reference rules are cached.
QuadratureRule gauss_legendre(int n, double a, double b);

/// n-point Gauss-Hermite rule for the standard normal weight G(x): the
/// weights sum to 1, so integrate(f) ~= int G(x) f(x) dx.
QuadratureRule gauss_hermite_normal(int n);

/// Default x-integration rule: 400-node Gauss-Legendre on
/// [-(10 + reach), 10 + reach].
QuadratureRule meter_rule(double reach, int nodes = 400);

}  // namespace wmsim
