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

#include <benchmark/benchmark.h>

#include "wmsim/collective.hpp"
#include "wmsim/montecarlo.hpp"
#include "wmsim/pointer.hpp"
#include "wmsim/protocols.hpp"

namespace {

using wmsim::Complex;
using wmsim::Matrix;
using wmsim::Observable;
using wmsim::PureState;
using wmsim::Vector;

Matrix sigma_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

PureState qubit(Complex a, Complex b) {
  Vector v(2);
  v << a, b;
  return PureState::normalized(v);
}

wmsim::PointerWavefunction postselected(double lambda) {
  const wmsim::MeasurementSetup m(Observable(sigma_x()), lambda, qubit(1, 0), qubit(0.6, 0.8));
  return wmsim::postselected_pointer(m);
}

void BM_PointerOverlap(benchmark::State& state) {
  const wmsim::PointerWavefunction a = postselected(0.5);
  const wmsim::PointerWavefunction b = postselected(1.5);
  for (auto _ : state) benchmark::DoNotOptimize(wmsim::overlap(a, b));
}
BENCHMARK(BM_PointerOverlap);

void BM_SamplerBuild(benchmark::State& state) {
  const wmsim::PointerWavefunction w = postselected(1.0).normalized();
  wmsim::SamplerConfig cfg;
  cfg.grid_points = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const wmsim::PointerSampler s(w, cfg);
    benchmark::DoNotOptimize(s.quantile(0.5));
  }
}
BENCHMARK(BM_SamplerBuild)->Arg(4096)->Arg(16384);

void BM_SamplerQuantile(benchmark::State& state) {
  const wmsim::PointerSampler s(postselected(1.0).normalized(), wmsim::SamplerConfig{});
  double u = 0.0;
  for (auto _ : state) {
    u = std::fmod(u + 0.6180339887498949, 1.0);
    benchmark::DoNotOptimize(s.quantile(u));
  }
}
BENCHMARK(BM_SamplerQuantile);

void BM_MonteCarloTrials(benchmark::State& state) {
  const auto protocol = static_cast<wmsim::Protocol>(state.range(0));
  wmsim::TrialPlan plan{.protocol = protocol,
                        .a = Observable(sigma_x()),
                        .coupling = 0.1,
                        .psi = qubit(1, 0),
                        .phi = qubit(0.6, 0.8),
                        .b = std::nullopt};
  if (protocol == wmsim::Protocol::kSequential) {
    Matrix y(2, 2);
    y << 0, Complex(0, -1), Complex(0, 1), 0;
    plan.b = Observable(y);
    plan.coupling_b = 0.1;
    plan.psi = qubit(1, 1);
    plan.phi = qubit(1, std::polar(1.0, std::numbers::pi / 4));
  }
  if (protocol == wmsim::Protocol::kThreshold) {
    plan.coupling = 0.01;
    plan.phi.reset();
  }
  plan.trials = 1 << 18;
  for (auto _ : state) benchmark::DoNotOptimize(wmsim::run(plan).stats.n_postselected);
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(plan.trials));
}
BENCHMARK(BM_MonteCarloTrials)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_CollectiveSpectral(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const wmsim::CollectiveSetup cs(Observable(sigma_x()), 1.0, qubit(1, 0),
                                  qubit(0.5, Complex(0, std::sqrt(0.75))), n);
  for (auto _ : state) {
    const wmsim::CollectiveModel model(cs, wmsim::CollectiveEngine::kSpectral);
    benchmark::DoNotOptimize(model.conditional_mean(wmsim::MeterBasis::kXPrime));
  }
}
BENCHMARK(BM_CollectiveSpectral)
    ->RangeMultiplier(4)
    ->Range(25, 1600)
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
