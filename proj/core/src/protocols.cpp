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

#include "wmsim/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wmsim/quadrature.hpp"

namespace wmsim {
namespace {

constexpr double kBranchMergeTolerance = 1e-12;
// Eigen-components below this fraction of the branch norm are dropped.
constexpr double kNegligibleComponent = 1e-28;

struct Components {
  std::vector<double> eigenvalues;
  std::vector<Vector> vectors;  // P_i psi
};

Components components(const Observable& a, const PureState& psi) {
  require_same_dimension(a.dim(), psi.dim(), "observable and state");
  const EigenSystem& es = a.eigensystem();
  Components out;
  for (std::size_t i = 0; i < es.size(); ++i) {
    out.eigenvalues.push_back(es.eigenvalues[i]);
    out.vectors.push_back(es.projectors[i] * psi.amplitudes());
  }
  return out;
}

std::vector<Complex> postselected_weights(const Components& c, const PureState& phi) {
  std::vector<Complex> w;
  for (const Vector& v : c.vectors) w.push_back(phi.amplitudes().dot(v));
  return w;
}

void require_meter(const JointState& js, int meter) {
  if (meter < 0 || meter >= js.meter_count()) {
    throw Error(ErrorCode::kInvalidArgument, "meter index out of range");
  }
}

bool same_meters(const JointBranch& a, const JointBranch& b) {
  for (std::size_t m = 0; m < a.centers.size(); ++m) {
    if (std::abs(a.centers[m] - b.centers[m]) > kBranchMergeTolerance ||
        std::abs(a.phase_slopes[m] - b.phase_slopes[m]) > kBranchMergeTolerance) {
      return false;
    }
  }
  return true;
}

std::vector<JointBranch> merge_branches(std::vector<JointBranch> in) {
  std::vector<JointBranch> out;
  for (JointBranch& b : in) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const JointBranch& o) { return same_meters(o, b); });
    if (it == out.end()) {
      out.push_back(std::move(b));
      continue;
    }
    it->system = it->weight * it->system + b.weight * b.system;
    it->weight = 1.0;
    for (std::size_t m = 0; m < b.eigen_indices.size(); ++m) {
      if (it->eigen_indices[m] != b.eigen_indices[m]) it->eigen_indices[m] = -1;
    }
  }
  return out;
}

// Splits every branch over the eigenspaces of `a` and lets `update` move the
// meter term of eigenvalue a_i.
template <typename Update>
JointState split_over_eigenspaces(const JointState& js, const Observable& a,
                                  int meter, Update update) {
  require_meter(js, meter);
  require_same_dimension(a.dim(), js.dim, "observable and joint state");
  const EigenSystem& es = a.eigensystem();
  JointState out;
  out.dim = js.dim;
  out.bases = js.bases;
  std::vector<JointBranch> branches;
  for (const JointBranch& b : js.branches) {
    const double total = b.system.squaredNorm();
    for (std::size_t i = 0; i < es.size(); ++i) {
      Vector v = es.projectors[i] * b.system;
      if (v.squaredNorm() <= kNegligibleComponent * total) continue;
      JointBranch nb = b;
      nb.system = std::move(v);
      nb.eigen_indices[meter] = static_cast<int>(i);
      update(nb, es.eigenvalues[i]);
      branches.push_back(std::move(nb));
    }
  }
  out.branches = merge_branches(std::move(branches));
  return out;
}

Complex term_pair(const MultiMeterAmplitude::Term& s, const MultiMeterAmplitude::Term& t,
                  std::span<const int> orders) {
  Complex v = std::conj(s.weight) * t.weight;
  for (std::size_t m = 0; m < s.centers.size(); ++m) {
    v *= gaussian_pair_integral(s.centers[m], s.phase_slopes[m], t.centers[m],
                                t.phase_slopes[m], orders[m]);
  }
  return v;
}

}  // namespace

MeasurementSetup::MeasurementSetup(Observable observable_in, double coupling_in,
                                   PureState psi_in, PureState phi_in)
    : observable(std::move(observable_in)),
      coupling(coupling_in),
      psi(std::move(psi_in)),
      phi(std::move(phi_in)) {
  if (!std::isfinite(coupling)) {
    throw Error(ErrorCode::kInvalidArgument, "coupling must be finite");
  }
  require_same_dimension(observable.dim(), psi.dim(), "observable and psi");
  require_same_dimension(psi.dim(), phi.dim(), "psi and phi");
  if (std::abs(phi.amplitudes().dot(psi.amplitudes())) <= kOrthogonalityTolerance) {
    throw Error(ErrorCode::kOrthogonalPostselection,
                "orthogonal post-selection: |<phi|psi>| <= 1e-10");
  }
}

JointState JointState::prepare(const PureState& psi, int meters) {
  if (meters < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one meter");
  JointState js;
  js.dim = psi.dim();
  js.bases.assign(meters, MeterBasis::kX);
  JointBranch b;
  b.system = psi.amplitudes();
  b.eigen_indices.assign(meters, -1);
  b.centers.assign(meters, 0.0);
  b.phase_slopes.assign(meters, 0.0);
  js.branches.push_back(std::move(b));
  return js;
}

double JointState::squared_norm() const {
  Complex sum = 0.0;
  for (const JointBranch& s : branches) {
    for (const JointBranch& t : branches) {
      Complex v = std::conj(s.weight) * t.weight * s.system.dot(t.system);
      for (std::size_t m = 0; m < bases.size(); ++m) {
        v *= gaussian_pair_integral(s.centers[m], s.phase_slopes[m], t.centers[m],
                                    t.phase_slopes[m], 0);
      }
      sum += v;
    }
  }
  return sum.real();
}

JointState apply_von_neumann(const JointState& js, const Observable& a,
                             double coupling, int meter) {
  const bool x_basis = js.bases.at(meter) == MeterBasis::kX;
  return split_over_eigenspaces(js, a, meter, [&](JointBranch& b, double ai) {
    const double shift = coupling * ai;
    if (x_basis) {
      b.weight *= std::polar(1.0, -b.phase_slopes[meter] * shift);
      b.centers[meter] += shift;
    } else {
      b.phase_slopes[meter] -= 0.5 * shift;
    }
  });
}

JointState apply_phase_kick(const JointState& js, const Observable& a,
                            double coupling, int meter) {
  const bool x_basis = js.bases.at(meter) == MeterBasis::kX;
  return split_over_eigenspaces(js, a, meter, [&](JointBranch& b, double ai) {
    const double shift = coupling * ai;
    if (x_basis) {
      b.phase_slopes[meter] -= 0.5 * shift;
    } else {
      // In x' the meter position generates translations: xi(x') -> xi(x' + s).
      b.weight *= std::polar(1.0, b.phase_slopes[meter] * shift);
      b.centers[meter] -= shift;
    }
  });
}

JointState change_meter_basis(const JointState& js, int meter) {
  require_meter(js, meter);
  JointState out = js;
  const bool to_prime = js.bases[meter] == MeterBasis::kX;
  out.bases[meter] = to_prime ? MeterBasis::kXPrime : MeterBasis::kX;
  for (JointBranch& b : out.branches) {
    const double c = b.centers[meter];
    const double k = b.phase_slopes[meter];
    b.weight *= std::polar(1.0, c * k);
    if (to_prime) {
      b.centers[meter] = 2.0 * k;
      b.phase_slopes[meter] = -0.5 * c;
    } else {
      b.centers[meter] = -2.0 * k;
      b.phase_slopes[meter] = 0.5 * c;
    }
  }
  return out;
}

MultiMeterAmplitude::MultiMeterAmplitude(std::vector<Term> terms,
                                         std::vector<MeterBasis> bases)
    : terms_(std::move(terms)), bases_(std::move(bases)) {
  if (bases_.empty()) throw Error(ErrorCode::kInvalidArgument, "no meters");
  for (const Term& t : terms_) {
    if (t.centers.size() != bases_.size() || t.phase_slopes.size() != bases_.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "term arity differs from meter count");
    }
  }
}

Complex MultiMeterAmplitude::amplitude(std::span<const double> x) const {
  if (x.size() != bases_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "one coordinate per meter expected");
  }
  Complex sum = 0.0;
  for (const Term& t : terms_) {
    Complex v = t.weight;
    for (std::size_t m = 0; m < x.size(); ++m) {
      v *= std::polar(gaussian_pulse(x[m], t.centers[m]), t.phase_slopes[m] * x[m]);
    }
    sum += v;
  }
  return sum;
}

double MultiMeterAmplitude::density(std::span<const double> x) const {
  return std::norm(amplitude(x));
}

double MultiMeterAmplitude::squared_norm() const {
  const std::vector<int> zeros(bases_.size(), 0);
  Complex sum = 0.0;
  for (const Term& s : terms_) {
    for (const Term& t : terms_) sum += term_pair(s, t, zeros);
  }
  return sum.real();
}

double MultiMeterAmplitude::moment(std::span<const int> orders) const {
  if (orders.size() != bases_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "one order per meter expected");
  }
  const double n2 = squared_norm();
  if (!(n2 > 0.0)) {
    throw Error(ErrorCode::kZeroProbabilityOutcome, "post-selected amplitude vanishes");
  }
  Complex sum = 0.0;
  for (const Term& s : terms_) {
    for (const Term& t : terms_) sum += term_pair(s, t, orders);
  }
  return sum.real() / n2;
}

double MultiMeterAmplitude::mean(int meter) const {
  std::vector<int> orders(bases_.size(), 0);
  orders.at(meter) = 1;
  return moment(orders);
}

double MultiMeterAmplitude::covariance(int m1, int m2) const {
  std::vector<int> orders(bases_.size(), 0);
  if (m1 == m2) {
    orders.at(m1) = 2;
  } else {
    orders.at(m1) = 1;
    orders.at(m2) = 1;
  }
  return moment(orders) - mean(m1) * mean(m2);
}

PointerWavefunction MultiMeterAmplitude::pointer() const {
  if (bases_.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "pointer() needs a single meter");
  }
  std::vector<GaussianTerm> out;
  for (const Term& t : terms_) out.push_back({t.weight, t.centers[0], t.phase_slopes[0]});
  return PointerWavefunction(std::move(out), bases_[0]);
}

PostselectResult postselect(const JointState& js, const PureState& phi) {
  require_same_dimension(js.dim, phi.dim(), "joint state and phi");
  std::vector<MultiMeterAmplitude::Term> terms;
  for (const JointBranch& b : js.branches) {
    terms.push_back({b.weight * phi.amplitudes().dot(b.system), b.centers,
                     b.phase_slopes});
  }
  MultiMeterAmplitude amp(std::move(terms), js.bases);
  const double p = amp.squared_norm();
  return {std::move(amp), p, p < kLowProbabilityThreshold};
}

PointerWavefunction postselected_pointer(const MeasurementSetup& setup,
                                         MeterBasis basis) {
  const Components c = components(setup.observable, setup.psi);
  const std::vector<Complex> w = postselected_weights(c, setup.phi);
  std::vector<GaussianTerm> terms;
  for (std::size_t i = 0; i < w.size(); ++i) {
    terms.push_back({w[i], setup.coupling * c.eigenvalues[i], 0.0});
  }
  PointerWavefunction xi(std::move(terms), MeterBasis::kX);
  return basis == MeterBasis::kX ? xi : to_xprime_basis(xi);
}

double postselection_probability(const MeasurementSetup& setup) {
  const Components c = components(setup.observable, setup.psi);
  const std::vector<Complex> w = postselected_weights(c, setup.phi);
  const double lam = setup.coupling;
  Complex sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double da = c.eigenvalues[i] - c.eigenvalues[j];
      sum += std::conj(w[i]) * w[j] * std::exp(-lam * lam * da * da / 8.0);
    }
  }
  return sum.real();
}

ConditionalMeter conditional_meter(const MeasurementSetup& setup, MeterBasis basis) {
  JointState js = apply_von_neumann(JointState::prepare(setup.psi, 1),
                                    setup.observable, setup.coupling, 0);
  if (basis == MeterBasis::kXPrime) js = change_meter_basis(js, 0);
  PostselectResult r = postselect(js, setup.phi);
  return {r.amplitude.pointer().normalized(), r.probability, r.low_probability};
}

double conditional_meter_density(const MeasurementSetup& setup, MeterBasis basis,
                                 double x) {
  return density(conditional_meter(setup, basis).state, x);
}

double conditional_mean(const MeasurementSetup& setup, MeterBasis basis) {
  return moment(conditional_meter(setup, basis).state, 1);
}

double unconditional_meter_density(const Observable& a, double coupling,
                                   const PureState& psi, double x) {
  const Components c = components(a, psi);
  double sum = 0.0;
  for (std::size_t i = 0; i < c.vectors.size(); ++i) {
    sum += c.vectors[i].squaredNorm() *
           standard_normal_density(x - coupling * c.eigenvalues[i]);
  }
  return sum;
}

std::vector<MixtureComponent> unconditional_mixture(const Observable& a,
                                                    double coupling,
                                                    const PureState& psi) {
  const Components c = components(a, psi);
  std::vector<MixtureComponent> out;
  for (std::size_t i = 0; i < c.vectors.size(); ++i) {
    const double p = c.vectors[i].squaredNorm();
    if (p <= kNegligibleComponent) continue;
    out.push_back({p, PointerWavefunction(
                          {GaussianTerm{1.0, coupling * c.eigenvalues[i], 0.0}})});
  }
  return out;
}

KickModel::KickModel(const MeasurementSetup& setup, int hermite_nodes)
    : hermite_nodes_(hermite_nodes), coupling_(setup.coupling) {
  const Components c = components(setup.observable, setup.psi);
  eigenvalues_ = c.eigenvalues;
  weights_ = postselected_weights(c, setup.phi);
  const QuadratureRule rule = gauss_hermite_normal(hermite_nodes);
  probability_ = rule.integrate([&](double xp) { return std::norm(kicked_overlap(xp)); });
}

Complex KickModel::kicked_overlap(double xp) const {
  Complex sum = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    sum += weights_[i] * std::polar(1.0, -0.5 * coupling_ * eigenvalues_[i] * xp);
  }
  return sum;
}

double KickModel::conditional_density(double xp) const {
  if (!(probability_ > 0.0)) {
    throw Error(ErrorCode::kZeroProbabilityOutcome, "kick post-selection probability is zero");
  }
  return standard_normal_density(xp) * std::norm(kicked_overlap(xp)) / probability_;
}

double KickModel::conditional_mean() const {
  const QuadratureRule rule = gauss_hermite_normal(hermite_nodes_);
  return rule.integrate([&](double xp) { return xp * std::norm(kicked_overlap(xp)); }) /
         probability_;
}

double kick_protocol_conditional_density(const MeasurementSetup& setup, double xp) {
  return KickModel(setup).conditional_density(xp);
}

double kick_postselection_probability(const MeasurementSetup& setup) {
  return KickModel(setup).postselection_probability();
}

namespace {

PostselectResult kick_in_x(const MeasurementSetup& setup) {
  const JointState js = apply_phase_kick(JointState::prepare(setup.psi, 1),
                                         setup.observable, setup.coupling, 0);
  return postselect(js, setup.phi);
}

}  // namespace

double kick_in_x_protocol(const MeasurementSetup& setup, double x) {
  const PostselectResult r = kick_in_x(setup);
  if (!(r.probability > 0.0)) {
    throw Error(ErrorCode::kZeroProbabilityOutcome, "post-selection probability is zero");
  }
  const double xs[1] = {x};
  return r.amplitude.density(xs) / r.probability;
}

double kick_in_x_postselection_probability(const MeasurementSetup& setup) {
  return kick_in_x(setup).probability;
}

double kick_in_x_conditional_mean(const MeasurementSetup& setup) {
  return kick_in_x(setup).amplitude.mean(0);
}

PointerWavefunction delayed_choice(const MeasurementSetup& setup, MeterBasis choice) {
  const JointState js = apply_von_neumann(JointState::prepare(setup.psi, 1),
                                          setup.observable, setup.coupling, 0);
  const PointerWavefunction xi = postselect(js, setup.phi).amplitude.pointer().normalized();
  return choice == MeterBasis::kX ? xi : to_xprime_basis(xi);
}

SequentialSetup::SequentialSetup(Observable a_in, double coupling_a_in, Observable b_in,
                                 double coupling_b_in, PureState psi_in,
                                 PureState phi_in, std::array<MeterBasis, 2> bases_in,
                                 SequenceOrder order_in)
    : a(std::move(a_in)),
      coupling_a(coupling_a_in),
      b(std::move(b_in)),
      coupling_b(coupling_b_in),
      psi(std::move(psi_in)),
      phi(std::move(phi_in)),
      bases(bases_in),
      order(order_in) {
  if (!std::isfinite(coupling_a) || !std::isfinite(coupling_b)) {
    throw Error(ErrorCode::kInvalidArgument, "couplings must be finite");
  }
  require_same_dimension(a.dim(), b.dim(), "observables A and B");
  require_same_dimension(a.dim(), psi.dim(), "observable and psi");
  require_same_dimension(psi.dim(), phi.dim(), "psi and phi");
  if (std::abs(phi.amplitudes().dot(psi.amplitudes())) <= kOrthogonalityTolerance) {
    throw Error(ErrorCode::kOrthogonalPostselection,
                "orthogonal post-selection: |<phi|psi>| <= 1e-10");
  }
}

SequentialSetup SequentialSetup::reversed() const {
  SequentialSetup out = *this;
  out.order = order == SequenceOrder::kAFirst ? SequenceOrder::kBFirst
                                               : SequenceOrder::kAFirst;
  return out;
}

PostselectResult sequential_postselect(const SequentialSetup& sq) {
  JointState js = JointState::prepare(sq.psi, 2);
  if (sq.order == SequenceOrder::kAFirst) {
    js = apply_von_neumann(js, sq.a, sq.coupling_a, 0);
    js = apply_von_neumann(js, sq.b, sq.coupling_b, 1);
  } else {
    js = apply_von_neumann(js, sq.b, sq.coupling_b, 1);
    js = apply_von_neumann(js, sq.a, sq.coupling_a, 0);
  }
  for (int m = 0; m < 2; ++m) {
    if (sq.bases[m] == MeterBasis::kXPrime) js = change_meter_basis(js, m);
  }
  return postselect(js, sq.phi);
}

double sequential_joint_density(const SequentialSetup& sq, double x1, double x2) {
  const PostselectResult r = sequential_postselect(sq);
  if (!(r.probability > 0.0)) {
    throw Error(ErrorCode::kZeroProbabilityOutcome, "post-selection probability is zero");
  }
  const double xs[2] = {x1, x2};
  return r.amplitude.density(xs) / r.probability;
}

SequentialMoments sequential_moments(const SequentialSetup& sq) {
  const PostselectResult r = sequential_postselect(sq);
  return {r.probability, r.amplitude.mean(0), r.amplitude.mean(1),
          r.amplitude.covariance(0, 1)};
}

namespace {

// (second first)_w and (first second)_w for the interaction order of sq.
std::pair<Complex, Complex> ordered_products(const SequentialSetup& sq) {
  const Matrix& a = sq.a.matrix();
  const Matrix& b = sq.b.matrix();
  const Matrix ba = b * a;
  const Matrix ab = a * b;
  const Complex ba_w = matrix_weak_value(ba, sq.psi, sq.phi);
  const Complex ab_w = matrix_weak_value(ab, sq.psi, sq.phi);
  return sq.order == SequenceOrder::kAFirst ? std::pair{ba_w, ab_w}
                                            : std::pair{ab_w, ba_w};
}

}  // namespace

double sequential_order_gap(const SequentialSetup& sq) {
  const auto [later_earlier, earlier_later] = ordered_products(sq);
  return (later_earlier - earlier_later).real();
}

double sequential_covariance_coefficient(const SequentialSetup& sq) {
  const Complex later_earlier = ordered_products(sq).first;
  const Complex a_w = weak_value(sq.a, sq.psi, sq.phi).value;
  const Complex b_w = weak_value(sq.b, sq.psi, sq.phi).value;
  const Complex k = later_earlier - a_w * b_w;
  if (sq.bases[0] != sq.bases[1]) return k.imag();
  return sq.bases[0] == MeterBasis::kX ? k.real() : -k.real();
}

ConditionalStateMap::ConditionalStateMap(const Observable& a, double coupling,
                                         const PureState& psi)
    : coupling_(coupling) {
  Components c = components(a, psi);
  for (std::size_t i = 0; i < c.vectors.size(); ++i) {
    const double n2 = c.vectors[i].squaredNorm();
    if (n2 <= kNegligibleComponent) continue;
    eigenvalues_.push_back(c.eigenvalues[i]);
    component_norms_.push_back(n2);
    components_.push_back(std::move(c.vectors[i]));
  }
}

namespace {

// Gaussian factors sqrt G(x - lambda a_i), rescaled so the largest is 1.
std::vector<double> relative_factors(const std::vector<double>& eigenvalues,
                                     double coupling, double x) {
  std::vector<double> logs;
  for (double ai : eigenvalues) {
    const double u = x - coupling * ai;
    logs.push_back(-0.25 * u * u);
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  for (double& l : logs) l = std::exp(l - top);
  return logs;
}

}  // namespace

Vector ConditionalStateMap::unnormalized(double x) const {
  if (!std::isfinite(x)) throw Error(ErrorCode::kInvalidArgument, "outcome must be finite");
  const std::vector<double> s = relative_factors(eigenvalues_, coupling_, x);
  Vector chi = Vector::Zero(components_.front().size());
  for (std::size_t i = 0; i < s.size(); ++i) chi += s[i] * components_[i];
  return chi;
}

double ConditionalStateMap::postselection_probability(const PureState& phi,
                                                      double x) const {
  const std::vector<double> s = relative_factors(eigenvalues_, coupling_, x);
  Complex num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    num += s[i] * phi.amplitudes().dot(components_[i]);
    den += s[i] * s[i] * component_norms_[i];
  }
  return std::norm(num) / den;
}

PureState conditional_system_state(const Observable& a, double coupling,
                                   const PureState& psi, double x) {
  const Vector chi = ConditionalStateMap(a, coupling, psi).unnormalized(x);
  const double n = chi.norm();
  if (!(n > 0.0)) {
    throw Error(ErrorCode::kZeroProbabilityOutcome, "outcome has zero probability");
  }
  return PureState(chi / n);
}

DensityMatrix nonselective_state(const Observable& a, double coupling,
                                 const PureState& psi) {
  const Components c = components(a, psi);
  Matrix rho = Matrix::Zero(psi.dim(), psi.dim());
  for (std::size_t i = 0; i < c.vectors.size(); ++i) {
    for (std::size_t j = 0; j < c.vectors.size(); ++j) {
      const double da = c.eigenvalues[i] - c.eigenvalues[j];
      rho += std::exp(-coupling * coupling * da * da / 8.0) * c.vectors[i] *
             c.vectors[j].adjoint();
    }
  }
  return DensityMatrix(rho);
}

DisturbanceReport disturbance_report(const MeasurementSetup& setup) {
  const JointState js = apply_von_neumann(JointState::prepare(setup.psi, 1),
                                          setup.observable, setup.coupling, 0);
  const WeakValueResult wv = weak_value(setup.observable, setup.psi, setup.phi);
  const Matrix a2 = setup.observable.matrix() * setup.observable.matrix();
  const Complex a2_w = matrix_weak_value(a2, setup.psi, setup.phi);
  const DensityMatrix rho = nonselective_state(setup.observable, setup.coupling, setup.psi);

  DisturbanceReport r;
  r.postselect_prob_exact = postselect(js, setup.phi).probability;
  r.postselect_prob_unperturbed = wv.postselection_probability();
  r.second_order_coeff =
      r.postselect_prob_unperturbed * (std::norm(wv.value) - a2_w.real()) / 4.0;
  r.nonselective_purity = rho.purity();
  r.fidelity_to_initial = rho.expectation(setup.psi);
  const double back_action = rho.expectation(setup.phi) - r.postselect_prob_unperturbed;
  r.identity_residual =
      std::abs((r.postselect_prob_exact - r.postselect_prob_unperturbed) - back_action);
  if (r.identity_residual > 1e-12) {
    throw Error(ErrorCode::kNumericQuality,
                "disturbance identity residual " + std::to_string(r.identity_residual));
  }
  return r;
}

}  // namespace wmsim
