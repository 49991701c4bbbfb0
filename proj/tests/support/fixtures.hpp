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

// Shared helpers for the unit and acceptance tests: random setups and
// brute-force oracles that do not go through the library's algebra.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wmsim/quantum_core.hpp"

namespace wmsim::testing {

using Rng = std::mt19937_64;

inline Matrix sigma_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline Matrix sigma_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}
inline Matrix sigma_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline PureState qubit(Complex a, Complex b) {
  Vector v(2);
  v << a, b;
  return PureState::normalized(v);
}

inline PureState haar_state(int dim, Rng& rng) {
  std::normal_distribution<double> n;
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = Complex(n(rng), n(rng));
  return PureState::normalized(v);
}

/// Random Hermitian matrix rescaled to spectral radius 1.
inline Matrix random_hermitian(int dim, Rng& rng) {
  std::normal_distribution<double> n;
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(n(rng), n(rng));
  }
  Matrix h = 0.5 * (g + g.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const double r = es.eigenvalues().cwiseAbs().maxCoeff();
  return h / r;
}

struct RandomSetup {
  Matrix a;
  PureState psi;
  PureState phi;
};

/// Haar pair with |<phi|psi>|^2 >= min_overlap and a random observable.
inline RandomSetup random_setup(int dim, Rng& rng, double min_overlap = 0.25) {
  Matrix a = random_hermitian(dim, rng);
  for (;;) {
    PureState psi = haar_state(dim, rng);
    PureState phi = haar_state(dim, rng);
    if (std::norm(phi.amplitudes().dot(psi.amplitudes())) >= min_overlap) {
      return {a, psi, phi};
    }
  }
}

/// Weak value straight from the definition.
inline Complex direct_weak_value(const Matrix& a, const PureState& psi, const PureState& phi) {
  return phi.amplitudes().dot(a * psi.amplitudes()) / phi.amplitudes().dot(psi.amplitudes());
}

/// Eigenpairs from Eigen's solver (no degeneracy grouping).
struct Spectrum {
  std::vector<double> values;
  std::vector<Vector> vectors;
};
inline Spectrum spectrum(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  Spectrum s;
  for (int i = 0; i < a.rows(); ++i) {
    s.values.push_back(es.eigenvalues()[i]);
    s.vectors.push_back(es.eigenvectors().col(i));
  }
  return s;
}

inline double gauss(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// <phi| (I x <x|) e^{-i lambda A p} |psi>|g>, summed over eigenvectors.
inline Complex direct_x_amplitude(const Matrix& a, double lambda, const PureState& psi,
                                  const PureState& phi, double x) {
  const Spectrum s = spectrum(a);
  Complex out = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const Complex w = phi.amplitudes().dot(s.vectors[i]) * s.vectors[i].dot(psi.amplitudes());
    out += w * std::sqrt(gauss(x - lambda * s.values[i]));
  }
  return out;
}

/// Same in the x' = 2p basis: sqrt(G(x')) e^{-i lambda a x'/2}.
inline Complex direct_xprime_amplitude(const Matrix& a, double lambda, const PureState& psi,
                                       const PureState& phi, double xp) {
  const Spectrum s = spectrum(a);
  Complex out = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const Complex w = phi.amplitudes().dot(s.vectors[i]) * s.vectors[i].dot(psi.amplitudes());
    out += w * std::sqrt(gauss(xp)) * std::exp(Complex(0, -0.5 * lambda * s.values[i] * xp));
  }
  return out;
}

/// Adaptive Gauss-Kronrod over [lo, hi]; depth is capped because the
/// requested tolerance sits near roundoff.
template <typename F>
double integrate(F&& f, double lo, double hi) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 6, 1e-13);
}

/// Moment n of |amp|^2 over [-L, L] with L covering every displaced peak.
template <typename Amp>
double amplitude_moment(Amp&& amp, int n, double reach) {
  const double L = 14.0 + reach;
  return integrate(
      [&](double x) { return std::pow(x, n) * std::norm(amp(x)); }, -L, L);
}

}  // namespace wmsim::testing
