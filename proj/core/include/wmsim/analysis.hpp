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

#include <span>

namespace wmsim {

/// Model used to extrapolate a lambda-grid quantity to lambda -> 0.
enum class FitModel {
  /// y = c0 + c1 lambda^2. Appropriate for shift/lambda and cov/lambda^2,
  /// which are even in lambda.
  kEven,
  /// y = c0 + c1 lambda.
  kLinear,
};

struct WeakLimitFit {
  double intercept;
  double slope;
  /// Largest absolute residual of the least-squares fit.
  double residual;
};

/// Least-squares fit of values against the lambda grid.
WeakLimitFit fit_weak_limit(std::span<const double> lambdas,
                            std::span<const double> values,
                            FitModel model = FitModel::kEven);

/// Least-squares slope of log|y| against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// E[X | X >= threshold] for X ~ N(mean, 1).
double truncated_gaussian_mean(double mean, double threshold);

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + carry_; }
  CompensatedSum& operator+=(double v) {
    add(v);
    return *this;
  }
  void merge(const CompensatedSum& other);

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace wmsim
