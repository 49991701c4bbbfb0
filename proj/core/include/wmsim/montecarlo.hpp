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

#include <cstdint>
#include <optional>
#include <vector>

#include "wmsim/pointer.hpp"
#include "wmsim/protocols.hpp"
#include "wmsim/quantum_core.hpp"

namespace wmsim {

enum class Protocol { kSingle, kKick, kSequential, kThreshold };

/// Trials are processed in fixed chunks of this size; chunk results are
/// combined in chunk order, so statistics do not depend on `threads`.
inline constexpr std::uint64_t kTrialChunk = std::uint64_t{1} << 16;

struct TrialPlan {
  Protocol protocol = Protocol::kSingle;
  Observable a;
  double coupling = 0.0;
  PureState psi;
  /// Post-selection state; unused (and may be empty) for kThreshold.
  std::optional<PureState> phi;
  /// Second observable and coupling for kSequential.
  std::optional<Observable> b;
  double coupling_b = 0.0;
  SequenceOrder order = SequenceOrder::kAFirst;
  /// kThreshold keeps runs with x >= threshold_multiple * coupling.
  double threshold_multiple = 100.0;
  std::uint64_t trials = 1;
  /// Trial i draws from StreamRng(seed, 0, i); sampler.seed is not used.
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool keep_records = false;
  SamplerConfig sampler{};

  /// Throws kInvalidArgument / kDimensionMismatch / kOrthogonalPostselection.
  void validate() const;
};

/// One run. x2 is the second meter reading (kSequential only, else 0).
/// For kThreshold, `postselected` means "kept by the threshold".
struct ExperimentRecord {
  double x;
  double x2;
  bool postselected;
};

struct TrialStatistics {
  std::uint64_t n_total = 0;
  std::uint64_t n_postselected = 0;
  double postselection_rate = 0.0;
  double rate_standard_error = 0.0;
  /// Mean of x over all runs, and its standard error.
  double unconditional_mean = 0.0;
  double unconditional_standard_error = 0.0;
  /// Conditional means of x (and x2) over the selected runs.
  std::vector<double> conditional_means;
  std::vector<double> standard_errors;
  /// kSequential: plug-in covariance of (x, x2) over selected runs and its
  /// delete-one jackknife standard error.
  double covariance = 0.0;
  double covariance_standard_error = 0.0;
};

struct TrialResult {
  std::vector<ExperimentRecord> records;  // empty unless keep_records
  TrialStatistics stats;
};

/// Dispatches on plan.protocol. Throws kNoPostselectedRuns when no run is
/// selected.
TrialResult run(const TrialPlan& plan);
TrialResult run_single(const TrialPlan& plan);
TrialResult run_kick(const TrialPlan& plan);
TrialResult run_sequential(const TrialPlan& plan);
TrialResult run_threshold(const TrialPlan& plan);

/// Analytic counterparts of the Monte Carlo estimators.
struct AnalyticTargets {
  double postselection_rate;
  std::vector<double> conditional_means;
  double covariance = 0.0;
  double unconditional_mean;
};
AnalyticTargets analytic_targets(const TrialPlan& plan);

/// E[x | x >= t] for x drawn from sum_i |P_i psi|^2 G(x - lambda a_i).
double threshold_prediction(const Observable& a, double coupling,
                            const PureState& psi, double threshold);

}  // namespace wmsim
