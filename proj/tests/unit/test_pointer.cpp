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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "wmsim/error.hpp"
#include "wmsim/pointer.hpp"

namespace wmsim {
namespace {

using namespace wmsim::testing;

const double kG0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);

// Direct evaluation of one term: w e^{ikx} (2 pi)^{-1/4} e^{-(x-c)^2/4}.
Complex term_value(const GaussianTerm& t, double x) {
  return t.weight * std::exp(Complex(0, t.phase_slope * x)) *
         std::pow(2.0 * std::numbers::pi, -0.25) *
         std::exp(-0.25 * (x - t.center) * (x - t.center));
}

Complex direct_amplitude(const std::vector<GaussianTerm>& terms, double x) {
  Complex s = 0.0;
  for (const GaussianTerm& t : terms) s += term_value(t, x);
  return s;
}

std::vector<GaussianTerm> random_terms(Rng& rng, int n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<GaussianTerm> terms;
  for (int i = 0; i < n; ++i) terms.push_back({Complex(u(rng), u(rng)), u(rng), u(rng)});
  return terms;
}

TEST(InitialMeterTest, DensityNormAndMoments) {
  const PointerWavefunction g = initial_meter();
  EXPECT_NEAR(density(g, 0.0), kG0, 1e-15);
  EXPECT_NEAR(g.squared_norm(), 1.0, 1e-15);
  EXPECT_NEAR(moment(g, 1), 0.0, 1e-15);
  EXPECT_NEAR(moment(g, 2), 1.0, 1e-14);
}

TEST(OverlapTest, Examples) {
  const PointerWavefunction g = initial_meter();
  EXPECT_NEAR(std::abs(overlap(g, g) - 1.0), 0.0, 1e-15);

  const PointerWavefunction a({{1.0, 0.0, 0.0}});
  const PointerWavefunction b({{1.0, 2.0, 0.0}});
  const double quad = integrate(
      [&](double x) { return (std::conj(a.amplitude(x)) * b.amplitude(x)).real(); }, -20, 20);
  EXPECT_NEAR(overlap(a, b).real(), quad, 1e-12);
  EXPECT_NEAR(overlap(a, b).real(), std::exp(-0.5), 1e-14);

  const PointerWavefunction c({{1.0, 0.0, 1.0}});
  EXPECT_NEAR(std::abs(overlap(a, c)), std::exp(-0.5), 1e-14);
}

TEST(OverlapTest, HermitianSymmetryAndRandomQuadrature) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto ta = random_terms(rng, 5);
    const auto tb = random_terms(rng, 5);
    const PointerWavefunction a(ta), b(tb);
    const Complex ab = overlap(a, b);
    EXPECT_NEAR(std::abs(ab - std::conj(overlap(b, a))), 0.0, 1e-13);
    EXPECT_NEAR(overlap(a, a).imag(), 0.0, 1e-14);
    EXPECT_GT(overlap(a, a).real(), 0.0);
    const double re = integrate(
        [&](double x) {
          return (std::conj(direct_amplitude(ta, x)) * direct_amplitude(tb, x)).real();
        },
        -25, 25);
    const double im = integrate(
        [&](double x) {
          return (std::conj(direct_amplitude(ta, x)) * direct_amplitude(tb, x)).imag();
        },
        -25, 25);
    EXPECT_NEAR(ab.real(), re, 1e-10);
    EXPECT_NEAR(ab.imag(), im, 1e-10);
  }
}

TEST(OverlapTest, BasisMismatchThrows) {
  const PointerWavefunction g = initial_meter();
  try {
    overlap(g, to_xprime_basis(g));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBasisMismatch);
  }
}

TEST(DensityTest, Examples) {
  const PointerWavefunction shifted({{1.0, 3.0, 0.0}});
  EXPECT_NEAR(density(shifted, 3.0), kG0, 1e-15);

  const double r = 1.0 / std::sqrt(2.0);
  const std::vector<GaussianTerm> pair = {{r, -1.0, 0.0}, {r, 1.0, 0.0}};
  const PointerWavefunction w = PointerWavefunction(pair).normalized();
  const double scale = 1.0 / PointerWavefunction(pair).squared_norm();
  for (double x : {0.0, 0.5, -2.0}) {
    EXPECT_NEAR(density(w, x), std::norm(direct_amplitude(pair, x)) * scale, 1e-12);
  }
}

TEST(DensityTest, NonnegativeAndIntegratesToNorm) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const PointerWavefunction w(random_terms(rng, 5));
    double lo = 1.0;
    for (double x = -12; x <= 12; x += 0.01) lo = std::min(lo, density(w, x));
    EXPECT_GE(lo, 0.0);
    const double integral = integrate([&](double x) { return density(w, x); }, -25, 25);
    EXPECT_NEAR(integral, overlap(w, w).real(), 1e-9);
  }
}

TEST(MomentTest, Examples) {
  EXPECT_NEAR(moment(PointerWavefunction({{1.0, 5.0, 0.0}}), 1), 5.0, 1e-14);
  try {
    moment(initial_meter(), 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(MomentTest, ClosedFormMatchesAdaptiveQuadrature) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto terms = random_terms(rng, 5);
    const PointerWavefunction w(terms);
    for (int n = 0; n <= 2; ++n) {
      const double quad = integrate(
          [&](double x) { return std::pow(x, n) * std::norm(direct_amplitude(terms, x)); }, -30,
          30);
      EXPECT_NEAR(moment(w, n) * w.squared_norm(), quad, 1e-9) << "n=" << n;
    }
  }
}

TEST(MergeTest, DuplicateTermsLeaveDensityUnchanged) {
  const std::vector<GaussianTerm> dup = {
      {Complex(0.3, 0.1), 1.0, 0.5}, {Complex(0.2, -0.4), 1.0, 0.5}, {0.5, -1.0, 0.0}};
  const PointerWavefunction w(dup);
  EXPECT_EQ(w.terms().size(), 2u);
  for (double x = -5; x <= 5; x += 0.25) {
    EXPECT_NEAR(std::norm(w.amplitude(x)), std::norm(direct_amplitude(dup, x)), 1e-12);
  }
}

// Numeric Fourier oracle: xi'(x') = (4 pi)^{-1/2} int e^{-i x x'/2} xi(x) dx.
Complex numeric_xprime(const std::vector<GaussianTerm>& terms, double xp) {
  auto f = [&](double x, bool imag) {
    const Complex v = std::exp(Complex(0, -0.5 * x * xp)) * direct_amplitude(terms, x);
    return imag ? v.imag() : v.real();
  };
  const double re = integrate([&](double x) { return f(x, false); }, -30, 30);
  const double im = integrate([&](double x) { return f(x, true); }, -30, 30);
  return Complex(re, im) / std::sqrt(4.0 * std::numbers::pi);
}

TEST(XPrimeTest, InitialMeterIsInvariant) {
  const PointerWavefunction g = to_xprime_basis(initial_meter());
  EXPECT_EQ(g.basis(), MeterBasis::kXPrime);
  for (double x = -4; x <= 4; x += 0.5) {
    EXPECT_NEAR(std::abs(g.amplitude(x) - initial_meter().amplitude(x)), 0.0, 1e-15);
  }
}

TEST(XPrimeTest, DisplacedGaussianMatchesNumericTransform) {
  const double la = 0.7;
  const std::vector<GaussianTerm> t = {{1.0, la, 0.0}};
  const PointerWavefunction xp = to_xprime_basis(PointerWavefunction(t));
  ASSERT_EQ(xp.terms().size(), 1u);
  EXPECT_NEAR(xp.terms()[0].center, 0.0, 1e-15);
  EXPECT_NEAR(xp.terms()[0].phase_slope, -la / 2, 1e-15);
  for (double x = -5; x <= 5; x += 0.5) {
    EXPECT_NEAR(std::abs(xp.amplitude(x) - numeric_xprime(t, x)), 0.0, 1e-11);
  }
}

TEST(XPrimeTest, RandomTermsMatchNumericTransformAndPreserveNorm) {
  Rng rng(6);
  const auto terms = random_terms(rng, 4);
  const PointerWavefunction w(terms);
  const PointerWavefunction xp = to_xprime_basis(w);
  EXPECT_NEAR(xp.squared_norm(), w.squared_norm(), 1e-12);
  for (double x = -6; x <= 6; x += 0.75) {
    EXPECT_NEAR(std::abs(xp.amplitude(x) - numeric_xprime(terms, x)), 0.0, 1e-10);
  }
  const PointerWavefunction back = from_xprime_basis(xp);
  for (double x = -6; x <= 6; x += 0.75) {
    EXPECT_NEAR(std::abs(back.amplitude(x) - w.amplitude(x)), 0.0, 1e-13);
  }
  // The forward map applied twice is the parity image.
  for (const GaussianTerm& t : w.terms()) {
    const GaussianTerm twice = fourier_map(fourier_map(t));
    EXPECT_NEAR(twice.center, -t.center, 1e-15);
    EXPECT_NEAR(twice.phase_slope, -t.phase_slope, 1e-15);
    EXPECT_NEAR(std::abs(twice.weight - t.weight), 0.0, 1e-14);
  }
  try {
    to_xprime_basis(xp);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBasisMismatch);
  }
}

TEST(SamplerTest, StandardGaussianMoments) {
  SamplerConfig cfg;
  cfg.seed = 17;
  const std::vector<double> xs = sample(initial_meter(), cfg, 100000);
  double m = 0, v = 0;
  for (double x : xs) m += x;
  m /= xs.size();
  for (double x : xs) v += (x - m) * (x - m);
  v /= xs.size() - 1;
  EXPECT_LT(std::abs(m), 4.0 * std::sqrt(1e-5));
  EXPECT_NEAR(v, 1.0, 0.05);
}

TEST(SamplerTest, SameSeedSameDraws) {
  SamplerConfig cfg;
  cfg.seed = 99;
  EXPECT_EQ(sample(initial_meter(), cfg, 1000), sample(initial_meter(), cfg, 1000));
}

TEST(SamplerTest, GridTooCoarseThrows) {
  SamplerConfig cfg;
  cfg.grid_halfwidth = 6.0;
  try {
    PointerSampler s(initial_meter(), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGridTooCoarse);
  }
}

TEST(SamplerTest, InterferenceStatePassesKolmogorovSmirnov) {
  const std::vector<GaussianTerm> terms = {{Complex(0.8, 0.0), -1.5, 0.0},
                                           {Complex(-0.4, 0.3), 1.5, 0.4}};
  const PointerWavefunction w = PointerWavefunction(terms).normalized();
  const double norm = PointerWavefunction(terms).squared_norm();
  auto pdf = [&](double x) { return std::norm(direct_amplitude(terms, x)) / norm; };
  // Exact CDF tabulated by adaptive quadrature between consecutive knots.
  const double lo = -14.0, hi = 14.0, h = 0.01;
  std::vector<double> knots, cdf;
  double acc = 0.0;
  for (double x = lo; x <= hi + 1e-12; x += h) {
    if (!knots.empty()) acc += integrate(pdf, knots.back(), x);
    knots.push_back(x);
    cdf.push_back(acc);
  }
  auto exact_cdf = [&](double x) {
    if (x <= lo) return 0.0;
    if (x >= hi) return 1.0;
    const std::size_t i = static_cast<std::size_t>((x - lo) / h);
    return cdf[i] + integrate(pdf, knots[i], x);
  };
  const std::size_t n = 2000;
  const double critical = 1.6276 / std::sqrt(static_cast<double>(n));
  int passes = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SamplerConfig cfg;
    cfg.seed = 1000 + seed;
    std::vector<double> xs = sample(w, cfg, n);
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = exact_cdf(xs[i]);
      d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    passes += d < critical;
  }
  EXPECT_GE(passes, 19);
}

}  // namespace
}  // namespace wmsim
