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

#include "wmsim/quantum_core.hpp"

namespace wmsim {

/// Outcome-indexed Kraus operators of the Gaussian von Neumann measurement,
/// M_x = sum_i sqrt G(x - lambda a_i) P_i. The phase freedom of M_x is fixed
/// to this Hermitian, positive branch.
class KrausFamily {
 public:
  KrausFamily(Observable observable, double coupling);

  const Observable& observable() const { return observable_; }
  double coupling() const { return coupling_; }
  Matrix at(double x) const;
  /// Half-width of the default x-integration range is 10 + reach().
  double reach() const;
  /// int M_x^dagger M_x dx by Gauss-Legendre quadrature.
  Matrix completeness(int nodes = 400) const;

 private:
  Observable observable_;
  double coupling_;
};

Matrix kraus_at(const Observable& a, double coupling, double x);

/// (1/2)([M^dagger, O] M + M^dagger [O, M])
Matrix lindblad(const Matrix& m, const Matrix& o);

/// |<phi|M_x|psi>|^2
double joint_probability_density(const Observable& a, double coupling,
                                 const PureState& psi, const PureState& phi,
                                 double x);
/// Re(<phi|M_x^dagger M_x|psi> <psi|phi>); not a probability in general.
double pw_density(const Observable& a, double coupling, const PureState& psi,
                  const PureState& phi, double x);
/// <psi| L[M_x](|phi><phi|) |psi>
double error_term_density(const Observable& a, double coupling,
                          const PureState& psi, const PureState& phi, double x);

/// Weak-coupling profile of error_term_density / lambda^2:
///   |<phi|psi>|^2 G(x) (|A_w|^2 - Re (A^2)_w) x^2 / 4.
double error_term_leading_profile(const Observable& a, const PureState& psi,
                                  const PureState& phi, double x);

struct DecompositionSample {
  double x;
  double joint_p;
  double pw;
  double error;
};

DecompositionSample decompose(const KrausFamily& family, const PureState& psi,
                              const PureState& phi, double x);

/// int x M_x^dagger M_x dx = lambda A, in closed form.
Matrix first_moment_operator(const Observable& a, double coupling);
/// The same integral by Gauss-Legendre quadrature.
Matrix first_moment_operator_quadrature(const Observable& a, double coupling,
                                        int nodes = 400);

struct DecompositionIntegrals {
  double joint;        // int joint dx
  double pw;           // int pw dx
  double error;        // int error dx
  double joint_first;  // int x joint dx
  double pw_first;     // int x pw dx
};

DecompositionIntegrals decomposition_integrals(const Observable& a, double coupling,
                                               const PureState& psi,
                                               const PureState& phi, int nodes = 400);

struct GdiReport {
  double coupling;
  double max_error_over_lambda2;
  double integrated_error_over_lambda2;
  /// Weak-coupling value of integrated_error_over_lambda2.
  double predicted_integrated_error_over_lambda2;
  double mean_full;
  double mean_pw;
  double mean_gap;
};

/// Requires a nonzero coupling. The maximum is taken on 2001 uniform points
/// across the integration range.
GdiReport gdi_diagnostic(const Observable& a, double coupling, const PureState& psi,
                         const PureState& phi);

}  // namespace wmsim
