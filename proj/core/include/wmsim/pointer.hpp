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

#include <cstdint>
#include <span>
#include <vector>

#include "wmsim/quantum_core.hpp"

namespace wmsim {

/// Which meter quadrature a wavefunction is written in: position x, or the
/// rescaled momentum x' = 2p in which the initial meter state has the same
/// Gaussian form.
enum class MeterBasis { kX, kXPrime };

/// One term w e^{i k x} (2 pi)^{-1/4} e^{-(x - c)^2 / 4}.
struct GaussianTerm {
  Complex weight;
  double center = 0.0;
  double phase_slope = 0.0;
};

inline constexpr double kTermMergeTolerance = 1e-12;

/// Unit-width Gaussian pulse (2 pi)^{-1/4} e^{-(x - c)^2 / 4}; its square is
/// the standard normal density G(x - c).
double gaussian_pulse(double x, double center);

/// Standard normal density G(x).
double standard_normal_density(double x);

/// int x^n conj(e^{i k1 x} g(x - c1)) e^{i k2 x} g(x - c2) dx for n in {0,1,2},
/// where g is gaussian_pulse. Closed form:
///   e^{-(c1-c2)^2/8} e^{i dk m} e^{-dk^2/2} * {1, m + i dk, (m + i dk)^2 + 1}
/// with dk = k2 - k1 and m = (c1 + c2) / 2.
Complex gaussian_pair_integral(double c1, double k1, double c2, double k2, int n);

/// Finite superposition of displaced, phase-modulated unit-width Gaussians.
/// Terms are kept sorted by (center, phase_slope); terms closer than the
/// merge tolerance in both coordinates are summed.
class PointerWavefunction {
 public:
  explicit PointerWavefunction(std::vector<GaussianTerm> terms,
                               MeterBasis basis = MeterBasis::kX,
                               double merge_tolerance = kTermMergeTolerance);

  std::span<const GaussianTerm> terms() const { return terms_; }
  MeterBasis basis() const { return basis_; }

  Complex amplitude(double x) const;
  double squared_norm() const;
  PointerWavefunction scaled(Complex factor) const;
  /// Throws kZeroProbabilityOutcome if the squared norm is not positive.
  PointerWavefunction normalized() const;

 private:
  std::vector<GaussianTerm> terms_;
  MeterBasis basis_;
};

/// sqrt G(x): weight 1, center 0, slope 0, basis X.
PointerWavefunction initial_meter();

/// <a|b>; kBasisMismatch when the basis labels differ.
Complex overlap(const PointerWavefunction& a, const PointerWavefunction& b);

/// |xi(x)|^2 (not divided by the squared norm).
double density(const PointerWavefunction& w, double x);

/// int x^n |xi|^2 dx / <xi|xi> for n in {0, 1, 2}.
double moment(const PointerWavefunction& w, int n);

/// Exact change to the x' = 2p representation with the convention
/// <p|x> = (2 pi)^{-1/2} e^{-ipx}. A term (w, c, k) maps to
/// (w e^{ikc}, 2k, -c/2). Throws kBasisMismatch if already in x'.
PointerWavefunction to_xprime_basis(const PointerWavefunction& w);

/// Inverse of to_xprime_basis: (w, c, k) -> (w e^{ick}, -2k, c/2).
PointerWavefunction from_xprime_basis(const PointerWavefunction& w);

/// The forward term map applied regardless of basis label. Applying it
/// twice gives the parity image xi(-x).
GaussianTerm fourier_map(const GaussianTerm& t);

struct SamplerConfig {
  double grid_halfwidth = 10.0;
  int grid_points = 16384;
  std::uint64_t seed = 0;

  /// Throws kInvalidArgument unless grid_points >= 256 and halfwidth >= 6.
  void validate() const;
};

/// A mixture component: probability weight and a (not necessarily
/// normalized) pure meter state.
struct MixtureComponent {
  double probability;
  PointerWavefunction state;
};

/// Inverse-CDF sampler over a uniform grid spanning
/// [min center - halfwidth, max center + halfwidth], trapezoidal CDF and
/// linear interpolation inside each cell.
class PointerSampler {
 public:
  PointerSampler(const PointerWavefunction& w, const SamplerConfig& cfg);
  PointerSampler(std::span<const MixtureComponent> mixture,
                 const SamplerConfig& cfg);

  /// Maps u in [0, 1) to an outcome.
  double quantile(double u) const;
  /// Mass missing from the grid relative to the closed-form norm.
  double tail_mass() const { return tail_mass_; }
  double lower() const { return lower_; }
  double step() const { return step_; }
  std::span<const double> cdf() const { return cdf_; }

 private:
  void build(std::span<const MixtureComponent> mixture, const SamplerConfig& cfg);

  double lower_ = 0.0;
  double step_ = 0.0;
  double tail_mass_ = 0.0;
  std::vector<double> cdf_;
};

/// i.i.d. draws from density/norm^2; deterministic given cfg.seed.
/// Throws kGridTooCoarse when more than 1e-9 of the mass lies off-grid.
std::vector<double> sample(const PointerWavefunction& w, const SamplerConfig& cfg,
                           std::size_t count);

}  // namespace wmsim
