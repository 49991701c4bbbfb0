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

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "wmsim/analysis.hpp"
#include "wmsim/error.hpp"
#include "wmsim/protocols.hpp"

namespace wmsim {
namespace {

using namespace wmsim::testing;

double direct_probability(const RandomSetup& s, double lambda) {
  return amplitude_moment(
      [&](double x) { return direct_x_amplitude(s.a, lambda, s.psi, s.phi, x); }, 0,
      lambda * 1.0);
}

TEST(SetupTest, Validation) {
  EXPECT_THROW(MeasurementSetup(Observable(sigma_x()), 0.1, qubit(1, 0), qubit(0, 1)), Error);
  EXPECT_THROW(MeasurementSetup(Observable(sigma_x()), std::nan(""), qubit(1, 0), qubit(1, 0)),
               Error);
}

TEST(VonNeumannTest, ZeroCouplingLeavesStateUnchanged) {
  Rng rng(1);
  const PureState psi = haar_state(3, rng);
  const JointState js = JointState::prepare(psi, 1);
  const JointState out = apply_von_neumann(js, Observable(random_hermitian(3, rng)), 0.0, 0);
  ASSERT_EQ(out.branches.size(), 1u);
  EXPECT_LT((out.branches[0].weight * out.branches[0].system - psi.amplitudes()).norm(), 1e-14);
  EXPECT_DOUBLE_EQ(out.branches[0].centers[0], 0.0);
}

TEST(VonNeumannTest, EigenstateGivesSingleBranch) {
  const JointState out =
      apply_von_neumann(JointState::prepare(qubit(0, 1), 1), Observable(sigma_z()), 0.4, 0);
  ASSERT_EQ(out.branches.size(), 1u);
  EXPECT_NEAR(out.branches[0].centers[0], -0.4, 1e-15);
  EXPECT_NEAR(std::abs(out.branches[0].system[1] * out.branches[0].weight), 1.0, 1e-15);
}

TEST(VonNeumannTest, SigmaXBranchesMatchTensorProductOracle) {
  const double lambda = 0.3;
  const PureState psi = qubit(1, 0);
  const JointState out =
      apply_von_neumann(JointState::prepare(psi, 1), Observable(sigma_x()), lambda, 0);
  ASSERT_EQ(out.branches.size(), 2u);
  EXPECT_NEAR(out.squared_norm(), 1.0, 1e-12);
  std::vector<double> centers;
  for (const JointBranch& b : out.branches) centers.push_back(b.centers[0]);
  std::sort(centers.begin(), centers.end());
  EXPECT_NEAR(centers[0], -lambda, 1e-15);
  EXPECT_NEAR(centers[1], lambda, 1e-15);
  // Oracle on a meter grid: sum_i sqrt G(x - lambda a_i) P_i psi.
  const Spectrum sp = spectrum(sigma_x());
  for (double x = -4; x <= 4; x += 0.5) {
    Vector expected = Vector::Zero(2);
    for (int i = 0; i < 2; ++i) {
      expected += std::sqrt(gauss(x - lambda * sp.values[i])) * sp.vectors[i] *
                  sp.vectors[i].dot(psi.amplitudes());
    }
    Vector got = Vector::Zero(2);
    for (const JointBranch& b : out.branches) {
      got += b.weight * b.system * std::exp(Complex(0, b.phase_slopes[0] * x)) *
             std::sqrt(gauss(x - b.centers[0]));
    }
    EXPECT_LT((got - expected).norm(), 1e-14);
  }
}

TEST(VonNeumannTest, NormConservedOnRandomSetups) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 3;
    JointState js = JointState::prepare(haar_state(d, rng), 2);
    js = apply_von_neumann(js, Observable(random_hermitian(d, rng)), 0.7, 0);
    js = apply_von_neumann(js, Observable(random_hermitian(d, rng)), 1.3, 1);
    EXPECT_NEAR(js.squared_norm(), 1.0, 1e-12);
  }
}

TEST(VonNeumannTest, DimensionMismatchThrows) {
  try {
    apply_von_neumann(JointState::prepare(qubit(1, 0), 1), Observable(Matrix::Identity(3, 3)),
                      0.1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(PostselectTest, ZeroCouplingProbabilityIsOverlap) {
  Rng rng(3);
  const RandomSetup s = random_setup(3, rng);
  const MeasurementSetup m(Observable(s.a), 0.0, s.psi, s.phi);
  EXPECT_NEAR(postselection_probability(m),
              std::norm(s.phi.amplitudes().dot(s.psi.amplitudes())), 1e-15);
}

TEST(PostselectTest, SigmaXClosedForm) {
  const double l = 0.1;
  const MeasurementSetup m(Observable(sigma_x()), l, qubit(1, 0), qubit(1, 0));
  const double closed = 0.5 + 0.5 * std::exp(-l * l / 2);
  EXPECT_NEAR(postselection_probability(m), closed, 1e-15);
  EXPECT_NEAR(postselection_probability(m), 0.9975062395963408, 1e-13);
  const JointState js =
      apply_von_neumann(JointState::prepare(qubit(1, 0), 1), Observable(sigma_x()), l, 0);
  EXPECT_NEAR(postselect(js, qubit(1, 0)).probability, closed, 1e-15);
  // Second-order formula 1 + (l^2/4)(|A_w|^2 - Re (A^2)_w) with A_w = 0, (A^2)_w = 1.
  EXPECT_NEAR(postselection_probability(m), 1.0 - l * l / 4, 1e-5);
}

TEST(PostselectTest, MatchesQuadratureOnRandomSetups) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const RandomSetup s = random_setup(2 + trial % 2, rng, 0.05);
    for (double l : {0.1, 1.0, 3.0}) {
      const MeasurementSetup m(Observable(s.a), l, s.psi, s.phi);
      EXPECT_NEAR(postselection_probability(m), direct_probability(s, l), 1e-9);
    }
  }
}

TEST(PostselectTest, LowProbabilityIsFlaggedNotFatal) {
  const double eps = 1e-7;
  const PureState phi = qubit(eps, std::sqrt(1 - eps * eps));
  const MeasurementSetup m(Observable(sigma_z()), 0.0, qubit(1, 0), phi);
  const ConditionalMeter c = conditional_meter(m, MeterBasis::kX);
  EXPECT_TRUE(c.low_probability);
}

TEST(ConditionalDensityTest, MatchesDirectAmplitudeInBothBases) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const RandomSetup s = random_setup(2 + trial % 2, rng, 0.05);
    const double l = 0.8;
    const MeasurementSetup m(Observable(s.a), l, s.psi, s.phi);
    const double p = direct_probability(s, l);
    for (double x = -5; x <= 5; x += 0.5) {
      EXPECT_NEAR(conditional_meter_density(m, MeterBasis::kX, x),
                  std::norm(direct_x_amplitude(s.a, l, s.psi, s.phi, x)) / p, 1e-12);
      EXPECT_NEAR(conditional_meter_density(m, MeterBasis::kXPrime, x),
                  std::norm(direct_xprime_amplitude(s.a, l, s.psi, s.phi, x)) / p, 1e-12);
    }
    const double mean_x = amplitude_moment(
        [&](double x) { return direct_x_amplitude(s.a, l, s.psi, s.phi, x); }, 1, l);
    EXPECT_NEAR(conditional_mean(m, MeterBasis::kX), mean_x / p, 1e-10);
  }
}

TEST(ConditionalDensityTest, ZeroCouplingGivesGaussian) {
  Rng rng(6);
  const RandomSetup s = random_setup(3, rng);
  const MeasurementSetup m(Observable(s.a), 0.0, s.psi, s.phi);
  for (double x : {-2.0, 0.0, 1.5}) {
    EXPECT_NEAR(conditional_meter_density(m, MeterBasis::kX, x), gauss(x), 1e-15);
  }
}

TEST(ConditionalDensityTest, WeakLimitRecoversRealPart) {
  Rng rng(7);
  const std::vector<double> grid = {0.2, 0.1, 0.05, 0.025};
  for (int trial = 0; trial < 10; ++trial) {
    const RandomSetup s = random_setup(2 + trial % 2, rng);
    std::vector<double> ratios;
    for (double l : grid) {
      ratios.push_back(
          conditional_mean(MeasurementSetup(Observable(s.a), l, s.psi, s.phi), MeterBasis::kX) /
          l);
    }
    const double target = direct_weak_value(s.a, s.psi, s.phi).real();
    const double fit = fit_weak_limit(grid, ratios).intercept;
    EXPECT_NEAR(fit, target, std::max(1e-3 * std::abs(target), 1e-4));
  }
}

TEST(UnconditionalTest, EigenstateAndResolvedPeaks) {
  const Observable z(sigma_z());
  for (double x : {-1.0, 0.3, 2.0}) {
    EXPECT_NEAR(unconditional_meter_density(z, 0.5, qubit(1, 0), x), gauss(x - 0.5), 1e-15);
  }
  const Observable xo(sigma_x());
  EXPECT_NEAR(unconditional_meter_density(xo, 10.0, qubit(1, 0), 10.0), 0.5 * gauss(0), 1e-15);
  EXPECT_NEAR(unconditional_meter_density(xo, 10.0, qubit(1, 0), -10.0), 0.5 * gauss(0),
              1e-15);
  EXPECT_LT(unconditional_meter_density(xo, 10.0, qubit(1, 0), 0.0), 1e-20);
  EXPECT_EQ(unconditional_mixture(z, 0.5, qubit(1, 0)).size(), 1u);
}

TEST(KickTest, ZeroCouplingGivesGaussian) {
  const MeasurementSetup m(Observable(sigma_x()), 0.0, qubit(1, 0), qubit(1, 1));
  for (double x : {-1.0, 0.0, 2.5}) {
    EXPECT_NEAR(kick_protocol_conditional_density(m, x), gauss(x), 1e-14);
    EXPECT_NEAR(kick_in_x_protocol(m, x), gauss(x), 1e-14);
  }
}

TEST(KickTest, DualityWithXPrimeVonNeumannIsExact) {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const RandomSetup s = random_setup(2 + trial % 2, rng, 0.05);
    for (double l : {0.1, 0.5, 2.0}) {
      const MeasurementSetup m(Observable(s.a), l, s.psi, s.phi);
      EXPECT_NEAR(kick_postselection_probability(m), postselection_probability(m), 1e-12);
      const KickModel kick(m);
      for (double x = -6; x <= 6; x += 0.25) {
        EXPECT_NEAR(kick.conditional_density(x),
                    conditional_meter_density(m, MeterBasis::kXPrime, x), 1e-12);
      }
      EXPECT_NEAR(kick.conditional_mean(), conditional_mean(m, MeterBasis::kXPrime), 1e-12);
    }
  }
}

TEST(KickTest, KickInXMatchesDirectOracle) {
  Rng rng(9);
  const RandomSetup s = random_setup(2, rng);
  const double l = 0.6;
  const MeasurementSetup m(Observable(s.a), l, s.psi, s.phi);
  // G(x) |<phi| e^{-i l A x/2} |psi>|^2, i.e. the x' kick read with x in place of x'.
  const double p = amplitude_moment(
      [&](double x) { return direct_xprime_amplitude(s.a, l, s.psi, s.phi, x); }, 0, 0);
  EXPECT_NEAR(kick_in_x_postselection_probability(m), p, 1e-10);
  for (double x = -4; x <= 4; x += 0.5) {
    EXPECT_NEAR(kick_in_x_protocol(m, x),
                std::norm(direct_xprime_amplitude(s.a, l, s.psi, s.phi, x)) / p, 1e-10);
  }
}

TEST(DelayedChoiceTest, ZeroCouplingAndConsistency) {
  Rng rng(10);
  const RandomSetup s = random_setup(2, rng);
  const MeasurementSetup m0(Observable(s.a), 0.0, s.psi, s.phi);
  const PointerWavefunction g = delayed_choice(m0, MeterBasis::kX);
  for (double x : {-1.0, 0.5}) EXPECT_NEAR(density(g, x), gauss(x), 1e-14);
  const MeasurementSetup m(Observable(s.a), 0.7, s.psi, s.phi);
  for (MeterBasis b : {MeterBasis::kX, MeterBasis::kXPrime}) {
    const PointerWavefunction w = delayed_choice(m, b);
    EXPECT_EQ(w.basis(), b);
    for (double x = -3; x <= 3; x += 0.5) {
      EXPECT_NEAR(density(w, x), conditional_meter_density(m, b, x), 1e-13);
    }
  }
}

// Sequential oracle: sum_ij <phi| second_j first_i |psi> sqrt G(x1 - ..) sqrt G(x2 - ..).
double direct_sequential_density(const Matrix& a, double la, const Matrix& b, double lb,
                                 const PureState& psi, const PureState& phi, bool a_first,
                                 double x1, double x2, double* probability) {
  const Spectrum sa = spectrum(a), sb = spectrum(b);
  auto amp = [&](double u1, double u2) {
    Complex s = 0.0;
    for (std::size_t i = 0; i < sa.values.size(); ++i) {
      for (std::size_t j = 0; j < sb.values.size(); ++j) {
        const Matrix pa = sa.vectors[i] * sa.vectors[i].adjoint();
        const Matrix pb = sb.vectors[j] * sb.vectors[j].adjoint();
        const Matrix op = a_first ? Matrix(pb * pa) : Matrix(pa * pb);
        s += phi.amplitudes().dot(op * psi.amplitudes()) *
             std::sqrt(gauss(u1 - la * sa.values[i]) * gauss(u2 - lb * sb.values[j]));
      }
    }
    return s;
  };
  double p = 0.0;
  for (std::size_t i = 0; i < sa.values.size(); ++i) {
    for (std::size_t j = 0; j < sb.values.size(); ++j) {
      for (std::size_t k = 0; k < sa.values.size(); ++k) {
        for (std::size_t l = 0; l < sb.values.size(); ++l) {
          auto w = [&](std::size_t ii, std::size_t jj) {
            const Matrix pa = sa.vectors[ii] * sa.vectors[ii].adjoint();
            const Matrix pb = sb.vectors[jj] * sb.vectors[jj].adjoint();
            const Matrix op = a_first ? Matrix(pb * pa) : Matrix(pa * pb);
            return phi.amplitudes().dot(op * psi.amplitudes());
          };
          const double da = la * (sa.values[i] - sa.values[k]);
          const double db = lb * (sb.values[j] - sb.values[l]);
          p += (std::conj(w(i, j)) * w(k, l)).real() * std::exp(-(da * da + db * db) / 8);
        }
      }
    }
  }
  *probability = p;
  return std::norm(amp(x1, x2)) / p;
}

const PureState kSeqPsi = qubit(1, 1);
const PureState kSeqPhi = qubit(1, std::polar(1.0, std::numbers::pi / 4));

TEST(SequentialTest, JointDensityMatchesOracleBothOrders) {
  const double la = 0.7, lb = 0.4;
  for (SequenceOrder order : {SequenceOrder::kAFirst, SequenceOrder::kBFirst}) {
    const SequentialSetup sq(Observable(sigma_x()), la, Observable(sigma_y()), lb, kSeqPsi,
                             kSeqPhi, {MeterBasis::kX, MeterBasis::kX}, order);
    double p = 0.0;
    for (double x1 = -2; x1 <= 2; x1 += 1.0) {
      for (double x2 = -2; x2 <= 2; x2 += 1.0) {
        const double want =
            direct_sequential_density(sigma_x(), la, sigma_y(), lb, kSeqPsi, kSeqPhi,
                                      order == SequenceOrder::kAFirst, x1, x2, &p);
        EXPECT_NEAR(sequential_joint_density(sq, x1, x2), want, 1e-13);
      }
    }
    EXPECT_NEAR(sequential_moments(sq).probability, p, 1e-14);
  }
}

TEST(SequentialTest, CommutingOrdersAgree) {
  const SequentialSetup sq(Observable(sigma_z()), 0.5, Observable(sigma_z()), 0.3, kSeqPsi,
                           kSeqPhi);
  const SequentialSetup rev = sq.reversed();
  for (double x1 = -2; x1 <= 2; x1 += 0.5) {
    for (double x2 = -2; x2 <= 2; x2 += 0.5) {
      EXPECT_NEAR(sequential_joint_density(sq, x1, x2), sequential_joint_density(rev, x1, x2),
                  1e-12);
    }
  }
  EXPECT_NEAR(sequential_order_gap(sq), 0.0, 1e-14);
}

TEST(SequentialTest, ZeroSecondCouplingReduces) {
  Rng rng(11);
  const RandomSetup s = random_setup(2, rng);
  const SequentialSetup sq(Observable(s.a), 0.6, Observable(sigma_y()), 0.0, s.psi, s.phi);
  const MeasurementSetup m(Observable(s.a), 0.6, s.psi, s.phi);
  for (double x1 = -3; x1 <= 3; x1 += 0.5) {
    for (double x2 : {-1.0, 0.0, 0.7}) {
      EXPECT_NEAR(sequential_joint_density(sq, x1, x2),
                  conditional_meter_density(m, MeterBasis::kX, x1) * gauss(x2), 1e-12);
    }
  }
}

TEST(SequentialTest, OrderGapOracle) {
  const SequentialSetup sq(Observable(sigma_x()), 0.1, Observable(sigma_y()), 0.1, kSeqPsi,
                           kSeqPhi);
  const double gap = 2.0 * std::tan(std::numbers::pi / 8);
  EXPECT_NEAR(std::abs(sequential_order_gap(sq)), gap, 1e-12);
  EXPECT_NEAR(sequential_order_gap(sq.reversed()), -sequential_order_gap(sq), 1e-14);
  const SequentialSetup same(Observable(sigma_x()), 0.1, Observable(sigma_x()), 0.2, kSeqPsi,
                             kSeqPhi);
  EXPECT_NEAR(sequential_order_gap(same), 0.0, 1e-14);
}

TEST(SequentialTest, CovarianceCoefficientMatchesExactMomentsInAllBases) {
  const std::vector<double> grid = {0.2, 0.1, 0.05, 0.025};
  Rng rng(12);
  const RandomSetup s = random_setup(2, rng);
  const Matrix b = random_hermitian(2, rng);
  for (MeterBasis b0 : {MeterBasis::kX, MeterBasis::kXPrime}) {
    for (MeterBasis b1 : {MeterBasis::kX, MeterBasis::kXPrime}) {
      for (SequenceOrder order : {SequenceOrder::kAFirst, SequenceOrder::kBFirst}) {
        std::vector<double> ratios;
        for (double l : grid) {
          const SequentialSetup sq(Observable(s.a), l, Observable(b), l, s.psi, s.phi,
                                   {b0, b1}, order);
          ratios.push_back(sequential_moments(sq).covariance / (0.5 * l * l));
        }
        const SequentialSetup sq(Observable(s.a), 0.1, Observable(b), 0.1, s.psi, s.phi,
                                 {b0, b1}, order);
        const double want = sequential_covariance_coefficient(sq);
        EXPECT_NEAR(fit_weak_limit(grid, ratios).intercept, want,
                    0.02 * std::abs(want) + 1e-4);
      }
    }
  }
}

TEST(SequentialTest, OrthogonalThrows) {
  try {
    SequentialSetup(Observable(sigma_x()), 0.1, Observable(sigma_y()), 0.1, qubit(1, 0),
                    qubit(0, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOrthogonalPostselection);
  }
}

TEST(ConditionalStateTest, EigenstateAndZeroCoupling) {
  const PureState up = qubit(1, 0);
  const PureState chi = conditional_system_state(Observable(sigma_z()), 0.7, up, 1.3);
  EXPECT_NEAR(std::norm(chi.amplitudes().dot(up.amplitudes())), 1.0, 1e-15);
  Rng rng(13);
  const PureState psi = haar_state(3, rng);
  const PureState chi0 =
      conditional_system_state(Observable(random_hermitian(3, rng)), 0.0, psi, 0.4);
  EXPECT_NEAR(std::norm(chi0.amplitudes().dot(psi.amplitudes())), 1.0, 1e-14);
}

TEST(ConditionalStateTest, FarTailStaysFinite) {
  const PureState chi = conditional_system_state(Observable(sigma_x()), 1.0, qubit(1, 0), 80.0);
  EXPECT_NEAR(chi.amplitudes().norm(), 1.0, 1e-14);
}

TEST(ConditionalStateTest, MarginalizationGivesNonselectiveState) {
  Rng rng(14);
  for (int trial = 0; trial < 4; ++trial) {
    const int d = 2 + trial % 2;
    const Matrix a = random_hermitian(d, rng);
    const PureState psi = haar_state(d, rng);
    const double l = 0.9;
    const Observable obs(a);
    const DensityMatrix rho = nonselective_state(obs, l, psi);
    const double L = 10 + l;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        auto elem = [&](double x, bool imag) {
          const PureState chi = conditional_system_state(obs, l, psi, x);
          const double w = unconditional_meter_density(obs, l, psi, x);
          const Complex v = w * chi.amplitudes()[i] * std::conj(chi.amplitudes()[j]);
          return imag ? v.imag() : v.real();
        };
        const double re = integrate([&](double x) { return elem(x, false); }, -L, L);
        const double im = integrate([&](double x) { return elem(x, true); }, -L, L);
        EXPECT_NEAR(std::abs(rho.matrix()(i, j) - Complex(re, im)), 0.0, 1e-8);
      }
    }
  }
}

TEST(NonselectiveTest, EigenstateStaysPure) {
  const DensityMatrix rho = nonselective_state(Observable(sigma_z()), 2.0, qubit(1, 0));
  EXPECT_NEAR(rho.purity(), 1.0, 1e-15);
}

TEST(DisturbanceTest, IdentityOnRandomSetups) {
  Rng rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + trial % 3;
    const RandomSetup s = random_setup(d, rng, 0.01);
    const double l = 0.05 + 0.02 * trial;
    const DisturbanceReport r =
        disturbance_report(MeasurementSetup(Observable(s.a), l, s.psi, s.phi));
    // Independent rho: P_i psi psi^dag P_j e^{-l^2 (a_i - a_j)^2 / 8}.
    const Spectrum sp = spectrum(s.a);
    Matrix rho = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const Vector vi = sp.vectors[i] * sp.vectors[i].dot(s.psi.amplitudes());
        const Vector vj = sp.vectors[j] * sp.vectors[j].dot(s.psi.amplitudes());
        const double da = l * (sp.values[i] - sp.values[j]);
        rho += vi * vj.adjoint() * std::exp(-da * da / 8);
      }
    }
    const Matrix delta = rho - s.psi.projector();
    const double rhs = s.phi.amplitudes().dot(delta * s.phi.amplitudes()).real();
    EXPECT_NEAR(r.postselect_prob_exact - r.postselect_prob_unperturbed, rhs, 1e-12);
    EXPECT_LT(r.identity_residual, 1e-12);
    EXPECT_LT(r.nonselective_purity, 1.0);
  }
}

TEST(DisturbanceTest, ZeroCoupling) {
  Rng rng(16);
  const RandomSetup s = random_setup(2, rng);
  const DisturbanceReport r =
      disturbance_report(MeasurementSetup(Observable(s.a), 0.0, s.psi, s.phi));
  EXPECT_NEAR(r.postselect_prob_exact - r.postselect_prob_unperturbed, 0.0, 1e-15);
  EXPECT_NEAR(r.nonselective_purity, 1.0, 1e-14);
  EXPECT_NEAR(r.fidelity_to_initial, 1.0, 1e-14);
}

TEST(DisturbanceTest, SecondOrderCoefficient) {
  Rng rng(17);
  const RandomSetup s = random_setup(3, rng);
  const Complex aw = direct_weak_value(s.a, s.psi, s.phi);
  const Complex a2w = direct_weak_value(s.a * s.a, s.psi, s.phi);
  const double p0 = std::norm(s.phi.amplitudes().dot(s.psi.amplitudes()));
  const DisturbanceReport r =
      disturbance_report(MeasurementSetup(Observable(s.a), 0.01, s.psi, s.phi));
  EXPECT_NEAR(r.second_order_coeff, p0 * (std::norm(aw) - a2w.real()) / 4, 1e-12);
}

}  // namespace
}  // namespace wmsim
