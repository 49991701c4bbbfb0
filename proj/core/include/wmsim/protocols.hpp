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

#include <array>
#include <span>
#include <vector>

#include "wmsim/pointer.hpp"
#include "wmsim/quantum_core.hpp"

namespace wmsim {

/// Below this post-selection probability conditional quantities are flagged.
inline constexpr double kLowProbabilityThreshold = 1e-12;

/// Observable A, coupling lambda, pre-selection psi and post-selection phi.
struct MeasurementSetup {
  MeasurementSetup(Observable observable, double coupling, PureState psi,
                   PureState phi);

  Observable observable;
  double coupling;
  PureState psi;
  PureState phi;
};

/// One branch of system (x) meters:
///   weight * |system> (x) prod_m e^{i k_m x_m} g(x_m - c_m).
/// eigen_indices[m] is the eigenvalue index selected by the interaction on
/// meter m, or -1 if none (or if merged branches disagree).
struct JointBranch {
  Complex weight{1.0, 0.0};
  Vector system;
  std::vector<int> eigen_indices;
  std::vector<double> centers;
  std::vector<double> phase_slopes;
};

/// Branch decomposition of a system coupled to m Gaussian meters.
struct JointState {
  int dim = 0;
  std::vector<MeterBasis> bases;
  std::vector<JointBranch> branches;

  /// psi (x) sqrt G on every meter, all meters in the X basis.
  static JointState prepare(const PureState& psi, int meters);

  int meter_count() const { return static_cast<int>(bases.size()); }
  double squared_norm() const;
};

/// e^{-i lambda A p} on the given meter. Works in either meter basis.
JointState apply_von_neumann(const JointState& js, const Observable& a,
                             double coupling, int meter);

/// e^{-i lambda A x / 2} on the given meter (x the meter position).
JointState apply_phase_kick(const JointState& js, const Observable& a,
                            double coupling, int meter);

/// Rewrites one meter in the other quadrature (X <-> X').
JointState change_meter_basis(const JointState& js, int meter);

/// Post-selected multi-meter amplitude
///   sum_t w_t prod_m e^{i k_tm x_m} g(x_m - c_tm).
class MultiMeterAmplitude {
 public:
  struct Term {
    Complex weight;
    std::vector<double> centers;
    std::vector<double> phase_slopes;
  };

  MultiMeterAmplitude(std::vector<Term> terms, std::vector<MeterBasis> bases);

  int meter_count() const { return static_cast<int>(bases_.size()); }
  MeterBasis basis(int meter) const { return bases_.at(meter); }
  std::span<const Term> terms() const { return terms_; }

  Complex amplitude(std::span<const double> x) const;
  double density(std::span<const double> x) const;
  double squared_norm() const;
  /// int prod_m x_m^{orders[m]} |amp|^2 dx / squared_norm, orders in {0,1,2}.
  double moment(std::span<const int> orders) const;
  double mean(int meter) const;
  double covariance(int m1, int m2) const;

  /// Single-meter amplitude as a pointer wavefunction (meter_count() == 1).
  PointerWavefunction pointer() const;

 private:
  std::vector<Term> terms_;
  std::vector<MeterBasis> bases_;
};

struct PostselectResult {
  MultiMeterAmplitude amplitude;
  double probability;
  bool low_probability;
};

/// Contracts the system with <phi|.
PostselectResult postselect(const JointState& js, const PureState& phi);

/// Unnormalized post-selected pointer: weights <phi|P_i|psi>, centers
/// lambda a_i, rewritten in X' when requested.
PointerWavefunction postselected_pointer(const MeasurementSetup& setup,
                                         MeterBasis basis = MeterBasis::kX);

/// P_lambda(phi|psi) = sum_ij conj(w_i) w_j e^{-lambda^2 (a_i - a_j)^2 / 8}.
double postselection_probability(const MeasurementSetup& setup);

/// Normalized conditional meter state, obtained by changing the meter basis
/// before contracting with <phi|.
struct ConditionalMeter {
  PointerWavefunction state;
  double probability;
  bool low_probability;
};
ConditionalMeter conditional_meter(const MeasurementSetup& setup, MeterBasis basis);

double conditional_meter_density(const MeasurementSetup& setup, MeterBasis basis,
                                 double x);
double conditional_mean(const MeasurementSetup& setup, MeterBasis basis);

/// sum_i |P_i psi|^2 G(x - lambda a_i)
double unconditional_meter_density(const Observable& a, double coupling,
                                   const PureState& psi, double x);
/// The same mixture as sampler components (one per eigenvalue with nonzero weight).
std::vector<MixtureComponent> unconditional_mixture(const Observable& a,
                                                    double coupling,
                                                    const PureState& psi);

/// Random-kick protocol: x' ~ G drives exp(-i lambda A x'/2), then
/// post-selection. Normalizer from Gauss-Hermite quadrature of the kick.
class KickModel {
 public:
  explicit KickModel(const MeasurementSetup& setup, int hermite_nodes = 240);

  /// <phi| exp(-i lambda A x'/2) |psi>
  Complex kicked_overlap(double xp) const;
  double postselection_probability() const { return probability_; }
  double conditional_density(double xp) const;
  /// Conditional mean of x', by the same quadrature as the normalizer.
  double conditional_mean() const;

 private:
  std::vector<double> eigenvalues_;
  int hermite_nodes_;
  std::vector<Complex> weights_;
  double coupling_;
  double probability_;
};

double kick_protocol_conditional_density(const MeasurementSetup& setup, double xp);
double kick_postselection_probability(const MeasurementSetup& setup);

/// Interaction exp(-i lambda A x/2) read in the X basis.
double kick_in_x_protocol(const MeasurementSetup& setup, double x);
double kick_in_x_postselection_probability(const MeasurementSetup& setup);
double kick_in_x_conditional_mean(const MeasurementSetup& setup);

/// Post-selects first, then rewrites the normalized meter state in `choice`.
PointerWavefunction delayed_choice(const MeasurementSetup& setup, MeterBasis choice);

enum class SequenceOrder { kAFirst, kBFirst };

/// Two meters: meter 0 records A (outcome x1), meter 1 records B (x2).
/// `order` says which interaction acts first.
struct SequentialSetup {
  SequentialSetup(Observable a, double coupling_a, Observable b, double coupling_b,
                  PureState psi, PureState phi,
                  std::array<MeterBasis, 2> bases = {MeterBasis::kX, MeterBasis::kX},
                  SequenceOrder order = SequenceOrder::kAFirst);

  SequentialSetup reversed() const;

  Observable a;
  double coupling_a;
  Observable b;
  double coupling_b;
  PureState psi;
  PureState phi;
  std::array<MeterBasis, 2> bases;
  SequenceOrder order;
};

PostselectResult sequential_postselect(const SequentialSetup& sq);
double sequential_joint_density(const SequentialSetup& sq, double x1, double x2);

struct SequentialMoments {
  double probability;
  double mean1;
  double mean2;
  double covariance;
};
SequentialMoments sequential_moments(const SequentialSetup& sq);

/// Re[(BA)_w - (AB)_w]
double sequential_order_gap(const SequentialSetup& sq);

/// Weak-limit value of cov(x1, x2) / (lambda_a lambda_b / 2). With
/// K = (second first)_w - A_w B_w this is Re K for two X meters, -Re K for
/// two X' meters and Im K for mixed bases.
double sequential_covariance_coefficient(const SequentialSetup& sq);

/// Normalized sum_i sqrt G(x - lambda a_i) P_i psi, evaluated in log domain.
PureState conditional_system_state(const Observable& a, double coupling,
                                   const PureState& psi, double x);

/// Outcome-to-state map with the eigen-components of psi precomputed.
class ConditionalStateMap {
 public:
  ConditionalStateMap(const Observable& a, double coupling, const PureState& psi);

  /// Unnormalized chi (largest Gaussian factor scaled to 1).
  Vector unnormalized(double x) const;
  /// |<phi|chi_x>|^2 for normalized chi_x.
  double postselection_probability(const PureState& phi, double x) const;

 private:
  std::vector<double> eigenvalues_;
  std::vector<Vector> components_;
  std::vector<double> component_norms_;
  double coupling_;
};

/// rho_ij = (P_i psi psi^dagger P_j) e^{-lambda^2 (a_i - a_j)^2 / 8}
DensityMatrix nonselective_state(const Observable& a, double coupling,
                                 const PureState& psi);

struct DisturbanceReport {
  double postselect_prob_exact;
  double postselect_prob_unperturbed;
  /// |<phi|psi>|^2 (|A_w|^2 - Re (A^2)_w) / 4
  double second_order_coeff;
  double nonselective_purity;
  double fidelity_to_initial;
  /// |(P - |<phi|psi>|^2) - <phi|rho - psi psi^dagger|phi>|
  double identity_residual;
};

/// Throws kNumericQuality if the identity residual exceeds 1e-12.
DisturbanceReport disturbance_report(const MeasurementSetup& setup);

}  // namespace wmsim
