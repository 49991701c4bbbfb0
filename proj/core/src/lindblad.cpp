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

#include "wmsim/lindblad.hpp"

#include <algorithm>
#include <cmath>

#include "wmsim/pointer.hpp"
#include "wmsim/quadrature.hpp"

namespace wmsim {
namespace {

double pw_value(const Matrix& m, const PureState& psi, const PureState& phi) {
  const Vector& p = psi.amplitudes();
  const Vector& f = phi.amplitudes();
  const Complex mm = f.dot(m.adjoint() * (m * p));
  return (mm * p.dot(f)).real();
}

double error_value(const Matrix& m, const PureState& psi, const PureState& phi) {
  const Vector& p = psi.amplitudes();
  return p.dot(lindblad(m, phi.projector()) * p).real();
}

double joint_value(const Matrix& m, const PureState& psi, const PureState& phi) {
  return std::norm(phi.amplitudes().dot(m * psi.amplitudes()));
}

}  // namespace

KrausFamily::KrausFamily(Observable observable, double coupling)
    : observable_(std::move(observable)), coupling_(coupling) {
  if (!std::isfinite(coupling_)) {
    throw Error(ErrorCode::kInvalidArgument, "coupling must be finite");
  }
}

Matrix KrausFamily::at(double x) const {
  const EigenSystem& es = observable_.eigensystem();
  Matrix m = Matrix::Zero(es.dim(), es.dim());
  for (std::size_t i = 0; i < es.size(); ++i) {
    m += gaussian_pulse(x, coupling_ * es.eigenvalues[i]) * es.projectors[i];
  }
  return m;
}

double KrausFamily::reach() const {
  return std::abs(coupling_) * observable_.eigensystem().spectral_radius();
}

Matrix KrausFamily::completeness(int nodes) const {
  const QuadratureRule rule = meter_rule(reach(), nodes);
  Matrix sum = Matrix::Zero(observable_.dim(), observable_.dim());
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    const Matrix m = at(rule.nodes[j]);
    sum += rule.weights[j] * (m.adjoint() * m);
  }
  return sum;
}

Matrix kraus_at(const Observable& a, double coupling, double x) {
  return KrausFamily(a, coupling).at(x);
}

Matrix lindblad(const Matrix& m, const Matrix& o) {
  const Matrix md = m.adjoint();
  return 0.5 * ((md * o - o * md) * m + md * (o * m - m * o));
}

double joint_probability_density(const Observable& a, double coupling,
                                 const PureState& psi, const PureState& phi,
                                 double x) {
  return joint_value(kraus_at(a, coupling, x), psi, phi);
}

double pw_density(const Observable& a, double coupling, const PureState& psi,
                  const PureState& phi, double x) {
  return pw_value(kraus_at(a, coupling, x), psi, phi);
}

double error_term_density(const Observable& a, double coupling,
                          const PureState& psi, const PureState& phi, double x) {
  return error_value(kraus_at(a, coupling, x), psi, phi);
}

double error_term_leading_profile(const Observable& a, const PureState& psi,
                                  const PureState& phi, double x) {
  const WeakValueResult wv = weak_value(a, psi, phi);
  const Complex a2_w = matrix_weak_value(a.matrix() * a.matrix(), psi, phi);
  return wv.postselection_probability() * standard_normal_density(x) *
         (std::norm(wv.value) - a2_w.real()) * x * x / 4.0;
}

DecompositionSample decompose(const KrausFamily& family, const PureState& psi,
                              const PureState& phi, double x) {
  const Matrix m = family.at(x);
  return {x, joint_value(m, psi, phi), pw_value(m, psi, phi), error_value(m, psi, phi)};
}

Matrix first_moment_operator(const Observable& a, double coupling) {
  // int x G(x - lambda a_i) dx = lambda a_i on each eigenspace.
  const EigenSystem& es = a.eigensystem();
  Matrix sum = Matrix::Zero(es.dim(), es.dim());
  for (std::size_t i = 0; i < es.size(); ++i) {
    sum += coupling * es.eigenvalues[i] * es.projectors[i];
  }
  return sum;
}

Matrix first_moment_operator_quadrature(const Observable& a, double coupling,
                                        int nodes) {
  const KrausFamily family(a, coupling);
  const QuadratureRule rule = meter_rule(family.reach(), nodes);
  Matrix sum = Matrix::Zero(a.dim(), a.dim());
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    const Matrix m = family.at(rule.nodes[j]);
    sum += rule.weights[j] * rule.nodes[j] * (m.adjoint() * m);
  }
  return sum;
}

DecompositionIntegrals decomposition_integrals(const Observable& a, double coupling,
                                               const PureState& psi,
                                               const PureState& phi, int nodes) {
  const KrausFamily family(a, coupling);
  const QuadratureRule rule = meter_rule(family.reach(), nodes);
  DecompositionIntegrals out{};
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    const double x = rule.nodes[j];
    const double w = rule.weights[j];
    const DecompositionSample s = decompose(family, psi, phi, x);
    out.joint += w * s.joint_p;
    out.pw += w * s.pw;
    out.error += w * s.error;
    out.joint_first += w * x * s.joint_p;
    out.pw_first += w * x * s.pw;
  }
  return out;
}

GdiReport gdi_diagnostic(const Observable& a, double coupling, const PureState& psi,
                         const PureState& phi) {
  if (coupling == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "diagnostics are normalized by lambda^2");
  }
  const double l2 = coupling * coupling;
  const KrausFamily family(a, coupling);
  const double half = 10.0 + family.reach();
  double worst = 0.0;
  constexpr int kPoints = 2001;
  for (int j = 0; j < kPoints; ++j) {
    const double x = -half + 2.0 * half * j / (kPoints - 1);
    worst = std::max(worst, std::abs(error_value(family.at(x), psi, phi)));
  }
  const DecompositionIntegrals in = decomposition_integrals(a, coupling, psi, phi);
  const WeakValueResult wv = weak_value(a, psi, phi);
  const Complex a2_w = matrix_weak_value(a.matrix() * a.matrix(), psi, phi);

  GdiReport r;
  r.coupling = coupling;
  r.max_error_over_lambda2 = worst / l2;
  r.integrated_error_over_lambda2 = in.error / l2;
  r.predicted_integrated_error_over_lambda2 =
      wv.postselection_probability() * (std::norm(wv.value) - a2_w.real()) / 4.0;
  r.mean_full = in.joint_first / in.joint;
  r.mean_pw = in.pw_first / in.pw;
  r.mean_gap = r.mean_full - r.mean_pw;
  return r;
}

}  // namespace wmsim
