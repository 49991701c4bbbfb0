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

#include "wmsim/pointer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wmsim/rng.hpp"

namespace wmsim {
namespace {

const double kPulseNorm = std::pow(2.0 * std::numbers::pi, -0.25);

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require_basis(const PointerWavefunction& a, const PointerWavefunction& b) {
  if (a.basis() != b.basis()) {
    throw Error(ErrorCode::kBasisMismatch,
                "wavefunctions are written in different meter bases");
  }
}

Complex pair_sum(const PointerWavefunction& a, const PointerWavefunction& b, int n) {
  Complex sum = 0.0;
  for (const GaussianTerm& s : a.terms()) {
    for (const GaussianTerm& t : b.terms()) {
      sum += std::conj(s.weight) * t.weight *
             gaussian_pair_integral(s.center, s.phase_slope, t.center,
                                    t.phase_slope, n);
    }
  }
  return sum;
}

}  // namespace

double gaussian_pulse(double x, double center) {
  const double u = x - center;
  return kPulseNorm * std::exp(-0.25 * u * u);
}

double standard_normal_density(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

Complex gaussian_pair_integral(double c1, double k1, double c2, double k2, int n) {
  const double dc = c1 - c2;
  const double dk = k2 - k1;
  const double m = 0.5 * (c1 + c2);
  const Complex base = std::exp(-dc * dc / 8.0 - dk * dk / 2.0) *
                       std::polar(1.0, dk * m);
  const Complex z(m, dk);
  switch (n) {
    case 0: return base;
    case 1: return base * z;
    case 2: return base * (z * z + 1.0);
    default:
      throw Error(ErrorCode::kInvalidArgument, "moment order must be 0, 1 or 2");
  }
}

PointerWavefunction::PointerWavefunction(std::vector<GaussianTerm> terms,
                                         MeterBasis basis, double merge_tolerance)
    : basis_(basis) {
  if (terms.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "pointer wavefunction has no terms");
  }
  for (const GaussianTerm& t : terms) {
    if (!finite(t.weight) || !std::isfinite(t.center) ||
        !std::isfinite(t.phase_slope)) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite Gaussian term");
    }
  }
  std::sort(terms.begin(), terms.end(), [](const GaussianTerm& a, const GaussianTerm& b) {
    if (a.center != b.center) return a.center < b.center;
    return a.phase_slope < b.phase_slope;
  });
  // Sorted by center, so mergeable partners of a term lie in a contiguous
  // window of nearby centers.
  std::vector<bool> used(terms.size(), false);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (used[i]) continue;
    GaussianTerm merged = terms[i];
    for (std::size_t j = i + 1;
         j < terms.size() && terms[j].center - terms[i].center <= merge_tolerance;
         ++j) {
      if (!used[j] &&
          std::abs(terms[j].phase_slope - terms[i].phase_slope) <= merge_tolerance) {
        merged.weight += terms[j].weight;
        used[j] = true;
      }
    }
    terms_.push_back(merged);
  }
}

Complex PointerWavefunction::amplitude(double x) const {
  Complex sum = 0.0;
  for (const GaussianTerm& t : terms_) {
    sum += t.weight * std::polar(gaussian_pulse(x, t.center), t.phase_slope * x);
  }
  return sum;
}

double PointerWavefunction::squared_norm() const {
  return pair_sum(*this, *this, 0).real();
}

PointerWavefunction PointerWavefunction::scaled(Complex factor) const {
  std::vector<GaussianTerm> out(terms_.begin(), terms_.end());
  for (GaussianTerm& t : out) t.weight *= factor;
  return PointerWavefunction(std::move(out), basis_);
}

PointerWavefunction PointerWavefunction::normalized() const {
  const double n2 = squared_norm();
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw Error(ErrorCode::kZeroProbabilityOutcome,
                "pointer wavefunction has zero norm");
  }
  return scaled(1.0 / std::sqrt(n2));
}

PointerWavefunction initial_meter() {
  return PointerWavefunction({GaussianTerm{1.0, 0.0, 0.0}}, MeterBasis::kX);
}

Complex overlap(const PointerWavefunction& a, const PointerWavefunction& b) {
  require_basis(a, b);
  return pair_sum(a, b, 0);
}

double density(const PointerWavefunction& w, double x) {
  return std::norm(w.amplitude(x));
}

double moment(const PointerWavefunction& w, int n) {
  if (n < 0 || n > 2) {
    throw Error(ErrorCode::kInvalidArgument, "moment order must be 0, 1 or 2");
  }
  if (n == 0) return 1.0;
  const double n2 = w.squared_norm();
  if (!(n2 > 0.0)) {
    throw Error(ErrorCode::kZeroProbabilityOutcome, "zero-norm wavefunction");
  }
  return pair_sum(w, w, n).real() / n2;
}

GaussianTerm fourier_map(const GaussianTerm& t) {
  return {t.weight * std::polar(1.0, t.phase_slope * t.center),
          2.0 * t.phase_slope, -0.5 * t.center};
}

PointerWavefunction to_xprime_basis(const PointerWavefunction& w) {
  if (w.basis() != MeterBasis::kX) {
    throw Error(ErrorCode::kBasisMismatch, "wavefunction is already in x' basis");
  }
  std::vector<GaussianTerm> out;
  out.reserve(w.terms().size());
  for (const GaussianTerm& t : w.terms()) out.push_back(fourier_map(t));
  return PointerWavefunction(std::move(out), MeterBasis::kXPrime);
}

PointerWavefunction from_xprime_basis(const PointerWavefunction& w) {
  if (w.basis() != MeterBasis::kXPrime) {
    throw Error(ErrorCode::kBasisMismatch, "wavefunction is already in x basis");
  }
  std::vector<GaussianTerm> out;
  out.reserve(w.terms().size());
  for (const GaussianTerm& t : w.terms()) {
    out.push_back({t.weight * std::polar(1.0, t.center * t.phase_slope),
                   -2.0 * t.phase_slope, 0.5 * t.center});
  }
  return PointerWavefunction(std::move(out), MeterBasis::kX);
}

void SamplerConfig::validate() const {
  if (grid_points < 256) {
    throw Error(ErrorCode::kInvalidArgument, "sampler grid_points must be >= 256");
  }
  if (!(grid_halfwidth >= 6.0) || !std::isfinite(grid_halfwidth)) {
    throw Error(ErrorCode::kInvalidArgument, "sampler grid_halfwidth must be >= 6");
  }
}

PointerSampler::PointerSampler(const PointerWavefunction& w,
                               const SamplerConfig& cfg) {
  const MixtureComponent single{1.0, w};
  build(std::span<const MixtureComponent>(&single, 1), cfg);
}

PointerSampler::PointerSampler(std::span<const MixtureComponent> mixture,
                               const SamplerConfig& cfg) {
  build(mixture, cfg);
}

void PointerSampler::build(std::span<const MixtureComponent> mixture,
                           const SamplerConfig& cfg) {
  cfg.validate();
  if (mixture.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty mixture");
  }
  double lo = INFINITY;
  double hi = -INFINITY;
  double total_prob = 0.0;
  std::vector<double> inv_norms;
  for (const MixtureComponent& c : mixture) {
    if (!(c.probability >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "negative mixture probability");
    }
    total_prob += c.probability;
    const double n2 = c.state.squared_norm();
    if (!(n2 > 0.0)) {
      throw Error(ErrorCode::kZeroProbabilityOutcome, "zero-norm mixture component");
    }
    inv_norms.push_back(1.0 / n2);
    for (const GaussianTerm& t : c.state.terms()) {
      lo = std::min(lo, t.center);
      hi = std::max(hi, t.center);
    }
  }
  if (!(total_prob > 0.0)) {
    throw Error(ErrorCode::kZeroProbabilityOutcome, "mixture has no weight");
  }
  lower_ = lo - cfg.grid_halfwidth;
  const double upper = hi + cfg.grid_halfwidth;
  const int n = cfg.grid_points;
  step_ = (upper - lower_) / (n - 1);

  std::vector<double> pdf(n);
  for (int i = 0; i < n; ++i) {
    const double x = lower_ + i * step_;
    double v = 0.0;
    for (std::size_t c = 0; c < mixture.size(); ++c) {
      v += mixture[c].probability * inv_norms[c] * density(mixture[c].state, x);
    }
    pdf[i] = v / total_prob;
  }
  cdf_.assign(n, 0.0);
  for (int i = 1; i < n; ++i) {
    cdf_[i] = cdf_[i - 1] + 0.5 * step_ * (pdf[i - 1] + pdf[i]);
  }
  const double mass = cdf_.back();
  tail_mass_ = std::abs(1.0 - mass);
  if (tail_mass_ > 1e-9) {
    throw Error(ErrorCode::kGridTooCoarse,
                "sampler grid misses mass " + std::to_string(tail_mass_));
  }
  for (double& c : cdf_) c /= mass;
  cdf_.back() = 1.0;
}

double PointerSampler::quantile(double u) const {
  const double t = std::clamp(u, 0.0, 1.0);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), t);
  if (it == cdf_.end()) return lower_ + (cdf_.size() - 1) * step_;
  const std::size_t j = static_cast<std::size_t>(it - cdf_.begin());
  const std::size_t i = j - 1;
  const double frac = (t - cdf_[i]) / (cdf_[j] - cdf_[i]);
  return lower_ + (static_cast<double>(i) + frac) * step_;
}

std::vector<double> sample(const PointerWavefunction& w, const SamplerConfig& cfg,
                           std::size_t count) {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "count must be >= 1");
  const PointerSampler sampler(w, cfg);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    StreamRng rng(cfg.seed, /*stream=*/0, i);
    out[i] = sampler.quantile(rng.uniform());
  }
  return out;
}

}  // namespace wmsim
