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

#include "wmsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "wmsim/error.hpp"

namespace wmsim {
namespace {

struct Line {
  double intercept;
  double slope;
};

Line least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "fit needs >= 2 paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::kInvalidArgument, "degenerate abscissae");
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

}  // namespace

WeakLimitFit fit_weak_limit(std::span<const double> lambdas,
                            std::span<const double> values, FitModel model) {
  std::vector<double> x(lambdas.begin(), lambdas.end());
  if (model == FitModel::kEven) {
    for (double& v : x) v *= v;
  }
  const Line line = least_squares(x, values);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    worst = std::max(worst, std::abs(values[i] - line.intercept - line.slope * x[i]));
  }
  return {line.intercept, line.slope, worst};
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    lx.push_back(std::log(std::abs(x[i])));
    ly.push_back(std::log(std::abs(y[i])));
  }
  if (x.size() != y.size()) throw Error(ErrorCode::kInvalidArgument, "size mismatch");
  return least_squares(lx, ly).slope;
}

double truncated_gaussian_mean(double mean, double threshold) {
  const double z = threshold - mean;
  const double tail = 0.5 * std::erfc(z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  if (!(tail > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "threshold beyond representable tail");
  }
  return mean + pdf / tail;
}

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    carry_ += (sum_ - t) + v;
  } else {
    carry_ += (v - t) + sum_;
  }
  sum_ = t;
}

void CompensatedSum::merge(const CompensatedSum& other) {
  add(other.sum_);
  add(other.carry_);
}

}  // namespace wmsim
