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

#include "wmsim/collective.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace wmsim {
namespace {

struct Spectrum {
  std::vector<double> eigenvalues;
  std::vector<Complex> weights;  // <phi|P_i|psi>
  double spectral_radius;
};

Spectrum spectrum(const CollectiveSetup& cs) {
  const EigenSystem& es = cs.observable.eigensystem();
  Spectrum s{es.eigenvalues, {}, es.spectral_radius()};
  for (const Matrix& p : es.projectors) {
    s.weights.push_back(cs.phi.amplitudes().dot(p * cs.psi.amplitudes()));
  }
  return s;
}

// Visits every count vector (n_1..n_k) with sum N in lexicographic order.
template <typename Visit>
void for_each_composition(int total, int parts, std::vector<int>& counts, int index,
                          Visit& visit) {
  if (index == parts - 1) {
    counts[index] = total;
    visit(counts);
    return;
  }
  for (int n = 0; n <= total; ++n) {
    counts[index] = n;
    for_each_composition(total - n, parts, counts, index + 1, visit);
  }
}

constexpr double kSpectralStep = 0.025;

}  // namespace

CollectiveSetup::CollectiveSetup(Observable observable_in, double coupling_in,
                                 PureState psi_in, PureState phi_in, int systems_in,
                                 CollectiveLimits limits_in)
    : observable(std::move(observable_in)),
      coupling(coupling_in),
      psi(std::move(psi_in)),
      phi(std::move(phi_in)),
      systems(systems_in),
      limits(limits_in) {
  if (!std::isfinite(coupling)) {
    throw Error(ErrorCode::kInvalidArgument, "coupling must be finite");
  }
  if (systems < 1 || systems > limits.max_systems) {
    throw Error(ErrorCode::kInvalidArgument,
                "number of systems must lie in [1, " +
                    std::to_string(limits.max_systems) + "]");
  }
  require_same_dimension(observable.dim(), psi.dim(), "observable and psi");
  require_same_dimension(psi.dim(), phi.dim(), "psi and phi");
  if (std::abs(phi.amplitudes().dot(psi.amplitudes())) <= kOrthogonalityTolerance) {
    throw Error(ErrorCode::kOrthogonalPostselection,
                "orthogonal post-selection: |<phi|psi>| <= 1e-10");
  }
}

double collective_term_count(const CollectiveSetup& cs) {
  const double n = cs.systems;
  const double k = static_cast<double>(cs.observable.eigensystem().size());
  return std::round(std::exp(std::lgamma(n + k) - std::lgamma(n + 1.0) - std::lgamma(k)));
}

CollectivePointer collective_postselected_pointer(const CollectiveSetup& cs,
                                                  EnumerationOrder order) {
  const double count = collective_term_count(cs);
  if (count > cs.limits.max_terms) {
    throw Error(ErrorCode::kTermBudgetExceeded,
                "multinomial expansion needs " + std::to_string(count) +
                    " terms, budget is " + std::to_string(cs.limits.max_terms));
  }
  const Spectrum s = spectrum(cs);
  const int k = static_cast<int>(s.eigenvalues.size());
  const int n = cs.systems;

  std::vector<double> log_abs(k), arg(k);
  for (int i = 0; i < k; ++i) {
    log_abs[i] = std::log(std::abs(s.weights[i]));
    arg[i] = std::arg(s.weights[i]);
  }

  std::vector<LogWeightedTerm> raw;
  const double log_n_factorial = std::lgamma(n + 1.0);
  auto visit = [&](const std::vector<int>& counts) {
    double lm = log_n_factorial;
    double phase = 0.0;
    double shift = 0.0;
    for (int i = 0; i < k; ++i) {
      if (counts[i] == 0) continue;
      if (std::isinf(log_abs[i])) return;  // zero weight
      lm += counts[i] * log_abs[i] - std::lgamma(counts[i] + 1.0);
      phase += counts[i] * arg[i];
      shift += counts[i] * s.eigenvalues[i];
    }
    raw.push_back({lm, phase, cs.coupling * shift / n});
  };
  std::vector<int> counts(k);
  for_each_composition(n, k, counts, 0, visit);
  if (order == EnumerationOrder::kReverse) std::reverse(raw.begin(), raw.end());

  // Merge equal centers in log form; the stable sort makes the result
  // independent of enumeration order up to summation order inside a group.
  std::stable_sort(raw.begin(), raw.end(),
                   [](const LogWeightedTerm& a, const LogWeightedTerm& b) {
                     return a.center < b.center;
                   });
  const double tol = 1e-12 * std::abs(cs.coupling) * (s.spectral_radius + 1.0) / n;
  std::vector<LogWeightedTerm> merged;
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t j = i;
    double top = -INFINITY;
    while (j < raw.size() && raw[j].center - raw[i].center <= tol) {
      top = std::max(top, raw[j].log_magnitude);
      ++j;
    }
    Complex sum = 0.0;
    for (std::size_t t = i; t < j; ++t) {
      sum += std::polar(std::exp(raw[t].log_magnitude - top), raw[t].phase);
    }
    if (std::abs(sum) > 0.0) {
      merged.push_back({top + std::log(std::abs(sum)), std::arg(sum), raw[i].center});
    }
    i = j;
  }
  if (merged.empty()) {
    throw Error(ErrorCode::kZeroProbabilityOutcome, "collective amplitude vanishes");
  }

  double log_scale = -INFINITY;
  for (const LogWeightedTerm& t : merged) log_scale = std::max(log_scale, t.log_magnitude);
  std::vector<GaussianTerm> terms;
  for (const LogWeightedTerm& t : merged) {
    terms.push_back({std::polar(std::exp(t.log_magnitude - log_scale), t.phase), t.center, 0.0});
  }
  PointerWavefunction pointer(std::move(terms), MeterBasis::kX,
                              std::max(tol, kTermMergeTolerance * 1e-3));
  return {std::move(merged), log_scale, std::move(pointer)};
}

CollectiveModel::CollectiveModel(const CollectiveSetup& cs, CollectiveEngine engine)
    : engine_(engine), systems_(cs.systems) {
  const Spectrum s = spectrum(cs);
  double total_abs = 0.0;
  for (const Complex& w : s.weights) total_abs += std::abs(w);
  const Complex overlap = cs.phi.amplitudes().dot(cs.psi.amplitudes());
  log_overlap_ = std::log(std::abs(overlap));
  const double log_cancellation = std::log(total_abs) - log_overlap_;

  if (engine_ == CollectiveEngine::kAuto) {
    const bool benign = systems_ * log_cancellation / std::numbers::ln10 <= 6.0;
    const bool fits = collective_term_count(cs) <= cs.limits.max_terms;
    engine_ = benign && fits ? CollectiveEngine::kExpansion : CollectiveEngine::kSpectral;
  }

  if (engine_ == CollectiveEngine::kExpansion) {
    CollectivePointer cp = collective_postselected_pointer(cs);
    pointer_norm_ = cp.pointer.squared_norm();
    if (!(pointer_norm_ > 0.0)) {
      throw Error(ErrorCode::kNumericQuality, "collective expansion cancelled to zero");
    }
    log_ratio_ = 2.0 * cp.log_scale + std::log(pointer_norm_) - 2.0 * systems_ * log_overlap_;
    pointers_.push_back(cp.pointer);
    pointers_.push_back(to_xprime_basis(cp.pointer));
    return;
  }

  eigenvalues_ = s.eigenvalues;
  for (const Complex& w : s.weights) relative_weights_.push_back(w / overlap);
  beta_ = cs.coupling / (2.0 * systems_);
  step_ = kSpectralStep;
  // |u| <= exp(log_cancellation), so G |u|^{2N} < e^{-40} beyond this reach.
  const double reach = 2.0 * std::sqrt(systems_ * std::max(log_cancellation, 0.0) + 40.0);
  const int half = static_cast<int>(std::ceil(reach / step_));
  const double norm = std::pow(2.0 * std::numbers::pi, -0.25);
  double ratio = 0.0;
  for (int j = -half; j <= half; ++j) {
    const double xp = j * step_;
    const Complex value =
        norm * std::exp(static_cast<double>(systems_) * std::log(u(xp)) - 0.25 * xp * xp);
    nodes_.push_back(xp);
    amplitude_.push_back(value);
    ratio += std::norm(value);
  }
  ratio *= step_;
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw Error(ErrorCode::kNumericQuality, "collective normalization failed");
  }
  log_ratio_ = std::log(ratio);
}

Complex CollectiveModel::u(double xp) const {
  Complex sum = 0.0;
  for (std::size_t i = 0; i < eigenvalues_.size(); ++i) {
    sum += relative_weights_[i] * std::polar(1.0, -beta_ * eigenvalues_[i] * xp);
  }
  return sum;
}

Complex CollectiveModel::du(double xp) const {
  Complex sum = 0.0;
  for (std::size_t i = 0; i < eigenvalues_.size(); ++i) {
    const double k = -beta_ * eigenvalues_[i];
    sum += relative_weights_[i] * Complex(0.0, k) * std::polar(1.0, k * xp);
  }
  return sum;
}

double CollectiveModel::weighted_power(double xp, int n) const {
  const double log_g = -0.5 * xp * xp - 0.5 * std::log(2.0 * std::numbers::pi);
  if (n == 0) return std::exp(log_g);
  return std::exp(2.0 * n * std::log(std::abs(u(xp))) + log_g);
}

double CollectiveModel::log_postselection_probability() const {
  return log_ratio_ + 2.0 * systems_ * log_overlap_;
}

double CollectiveModel::postselection_ratio() const { return std::exp(log_ratio_); }

double CollectiveModel::conditional_density(MeterBasis basis, double x) const {
  if (engine_ == CollectiveEngine::kExpansion) {
    const PointerWavefunction& p = pointers_[basis == MeterBasis::kX ? 0 : 1];
    return density(p, x) / pointer_norm_;
  }
  const double ratio = postselection_ratio();
  if (basis == MeterBasis::kXPrime) return weighted_power(x, systems_) / ratio;
  Complex sum = 0.0;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    sum += std::polar(1.0, 0.5 * x * nodes_[j]) * amplitude_[j];
  }
  sum *= step_ / std::sqrt(4.0 * std::numbers::pi);
  return std::norm(sum) / ratio;
}

double CollectiveModel::conditional_mean(MeterBasis basis) const {
  if (engine_ == CollectiveEngine::kExpansion) {
    return moment(pointers_[basis == MeterBasis::kX ? 0 : 1], 1);
  }
  double sum = 0.0;
  for (double xp : nodes_) {
    if (basis == MeterBasis::kXPrime) {
      sum += xp * weighted_power(xp, systems_);
    } else {
      // x = 2i d/dx' in the x' representation.
      const double im = (std::conj(u(xp)) * du(xp)).imag();
      sum += -2.0 * systems_ * im * weighted_power(xp, systems_ - 1);
    }
  }
  return sum * step_ / postselection_ratio();
}

double collective_conditional_density(const CollectiveSetup& cs, MeterBasis basis,
                                      double x) {
  return CollectiveModel(cs).conditional_density(basis, x);
}

double collective_postselection_ratio(const CollectiveSetup& cs) {
  return CollectiveModel(cs).postselection_ratio();
}

}  // namespace wmsim
