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

#include "wmsim/pointer.hpp"
#include "wmsim/quantum_core.hpp"

namespace wmsim {

struct CollectiveLimits {
  int max_systems = 2000;
  /// Budget on the multinomial term count C(N + k - 1, k - 1).
  double max_terms = 2001;
};

/// One meter coupled to the average of A over N copies of psi, post-selected
/// on phi^N.
struct CollectiveSetup {
  CollectiveSetup(Observable observable, double coupling, PureState psi,
                  PureState phi, int systems, CollectiveLimits limits = {});

  Observable observable;
  double coupling;
  PureState psi;
  PureState phi;
  int systems;
  CollectiveLimits limits;
};

/// exp(log_magnitude + i phase) g(x - center)
struct LogWeightedTerm {
  double log_magnitude;
  double phase;
  double center;
};

enum class EnumerationOrder { kLexicographic, kReverse };

/// Post-selected pointer of the multinomial expansion. `pointer` carries the
/// weights divided by exp(log_scale), log_scale being the largest
/// log-magnitude, so the true amplitude is exp(log_scale) * pointer.
struct CollectivePointer {
  std::vector<LogWeightedTerm> terms;
  double log_scale;
  PointerWavefunction pointer;
};

/// Number of multinomial terms C(N + k - 1, k - 1) for k distinct eigenvalues.
double collective_term_count(const CollectiveSetup& cs);

/// Expands (sum_i w_i D(lambda a_i / N))^N, w_i = <phi|P_i|psi>. Equal centers
/// are merged within 1e-12 lambda (rho + 1) / N. Throws kTermBudgetExceeded.
CollectivePointer collective_postselected_pointer(
    const CollectiveSetup& cs, EnumerationOrder order = EnumerationOrder::kLexicographic);

/// kExpansion sums the multinomial series above. Its terms cancel by a factor
/// (sum_i |w_i| / |<phi|psi>|)^N, so it is only usable when that stays small.
/// kSpectral works with the x' amplitude <phi|exp(-i lambda A x'/(2N))|psi>^N
/// g(x') and reaches position-basis quantities by one Fourier quadrature.
/// kAuto picks the expansion when the cancellation factor is below 1e6 and the
/// term budget allows.
enum class CollectiveEngine { kAuto, kExpansion, kSpectral };

class CollectiveModel {
 public:
  explicit CollectiveModel(const CollectiveSetup& cs,
                           CollectiveEngine engine = CollectiveEngine::kAuto);

  CollectiveEngine engine() const { return engine_; }
  int systems() const { return systems_; }

  /// log P_lambda(phi^N | psi^N)
  double log_postselection_probability() const;
  /// log of P_lambda(phi^N | psi^N) / |<phi|psi>|^{2N}
  double log_postselection_ratio() const { return log_ratio_; }
  double postselection_ratio() const;

  double conditional_density(MeterBasis basis, double x) const;
  double conditional_mean(MeterBasis basis) const;

 private:
  // Spectral route: u(x') = sum_i wh_i e^{-i beta a_i x'}, wh = w / <phi|psi>.
  Complex u(double xp) const;
  Complex du(double xp) const;
  // |u|^{2n} G(x') without overflow.
  double weighted_power(double xp, int n) const;

  CollectiveEngine engine_;
  int systems_;
  double log_overlap_;  // log |<phi|psi>|
  double log_ratio_ = 0.0;

  // Expansion route.
  std::vector<PointerWavefunction> pointers_;  // X and X'
  double pointer_norm_ = 0.0;

  // Spectral route.
  std::vector<double> eigenvalues_;
  std::vector<Complex> relative_weights_;
  double beta_ = 0.0;
  double step_ = 0.0;
  std::vector<double> nodes_;
  std::vector<Complex> amplitude_;  // u^N g at the nodes
};

double collective_conditional_density(const CollectiveSetup& cs, MeterBasis basis,
                                      double x);
double collective_postselection_ratio(const CollectiveSetup& cs);

}  // namespace wmsim
