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

#include "wmsim/json_io.hpp"

#include <cmath>
#include <cstdio>

namespace wmsim::json_io {
namespace {

[[noreturn]] void schema(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kSchemaError, path + ": " + what);
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) schema(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema(path, "expected a finite number");
  return v;
}

}  // namespace

Complex complex_from_json(const Json& j, const std::string& path) {
  if (j.is_number()) return {number(j, path), 0.0};
  if (!j.is_array() || j.size() != 2) schema(path, "expected [re, im]");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

Vector vector_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) schema(path, "expected a non-empty array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] =
        complex_from_json(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

Matrix matrix_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) schema(path, "expected a non-empty array");
  // Rows form: d arrays of d entries each. An entry pair [re, im] can only
  // be mistaken for a row when d = 2, and a flat list of length 2 is invalid.
  bool nested = true;
  for (const Json& row : j) nested = nested && row.is_array() && row.size() == j.size();
  if (nested) {
    const auto d = static_cast<Eigen::Index>(j.size());
    Matrix m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      const std::string rp = path + "[" + std::to_string(r) + "]";
      if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != d) {
        schema(rp, "expected a row of " + std::to_string(d) + " entries");
      }
      for (Eigen::Index c = 0; c < d; ++c) {
        m(r, c) = complex_from_json(j[r][c], rp + "[" + std::to_string(c) + "]");
      }
    }
    return m;
  }
  const auto n = static_cast<Eigen::Index>(j.size());
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (d * d != n) schema(path, "flat matrix length must be a perfect square");
  Matrix m(d, d);
  for (Eigen::Index k = 0; k < n; ++k) {
    m(k / d, k % d) = complex_from_json(j[k], path + "[" + std::to_string(k) + "]");
  }
  return m;
}

Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v[i]));
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(to_json(m(r, c)));
  }
  return out;
}

Json to_json(const PureState& s) { return to_json(s.amplitudes()); }

std::string_view to_string(MeterBasis basis) {
  return basis == MeterBasis::kX ? "x" : "xprime";
}

std::string_view to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::kSingle: return "single";
    case Protocol::kKick: return "kick";
    case Protocol::kSequential: return "sequential";
    case Protocol::kThreshold: return "threshold";
  }
  return "unknown";
}

Json to_json(const PointerWavefunction& w) {
  Json terms = Json::array();
  for (const GaussianTerm& t : w.terms()) {
    terms.push_back({{"weight", to_json(t.weight)},
                     {"center", t.center},
                     {"phase_slope", t.phase_slope}});
  }
  return {{"basis", to_string(w.basis())}, {"terms", terms}};
}

PointerWavefunction pointer_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) schema(path, "expected an object");
  MeterBasis basis = MeterBasis::kX;
  if (j.contains("basis")) {
    const Json& b = j["basis"];
    if (b == "x") {
      basis = MeterBasis::kX;
    } else if (b == "xprime") {
      basis = MeterBasis::kXPrime;
    } else {
      schema(path + ".basis", "expected \"x\" or \"xprime\"");
    }
  }
  if (!j.contains("terms") || !j["terms"].is_array()) {
    schema(path + ".terms", "expected an array of terms");
  }
  std::vector<GaussianTerm> terms;
  for (std::size_t i = 0; i < j["terms"].size(); ++i) {
    const Json& t = j["terms"][i];
    const std::string tp = path + ".terms[" + std::to_string(i) + "]";
    if (!t.is_object() || !t.contains("weight") || !t.contains("center")) {
      schema(tp, "expected {weight, center[, phase_slope]}");
    }
    terms.push_back({complex_from_json(t["weight"], tp + ".weight"),
                     number(t["center"], tp + ".center"),
                     t.contains("phase_slope") ? number(t["phase_slope"], tp + ".phase_slope")
                                               : 0.0});
  }
  return PointerWavefunction(std::move(terms), basis);
}

Json to_json(const DisturbanceReport& r) {
  return {{"postselect_prob_exact", r.postselect_prob_exact},
          {"postselect_prob_unperturbed", r.postselect_prob_unperturbed},
          {"second_order_coeff", r.second_order_coeff},
          {"nonselective_purity", r.nonselective_purity},
          {"fidelity_to_initial", r.fidelity_to_initial},
          {"identity_residual", r.identity_residual}};
}

Json to_json(const GdiReport& r) {
  return {{"lambda", r.coupling},
          {"max_error_over_lambda2", r.max_error_over_lambda2},
          {"integrated_error_over_lambda2", r.integrated_error_over_lambda2},
          {"predicted_integrated_error_over_lambda2",
           r.predicted_integrated_error_over_lambda2},
          {"mean_full", r.mean_full},
          {"mean_pw", r.mean_pw},
          {"mean_gap", r.mean_gap}};
}

Json to_json(const TrialStatistics& s) {
  return {{"n_total", s.n_total},
          {"n_postselected", s.n_postselected},
          {"postselection_rate", s.postselection_rate},
          {"rate_standard_error", s.rate_standard_error},
          {"unconditional_mean", s.unconditional_mean},
          {"unconditional_standard_error", s.unconditional_standard_error},
          {"conditional_means", s.conditional_means},
          {"standard_errors", s.standard_errors},
          {"covariance", s.covariance},
          {"covariance_standard_error", s.covariance_standard_error}};
}

Json to_json(const AnalyticTargets& t) {
  return {{"postselection_rate", t.postselection_rate},
          {"conditional_means", t.conditional_means},
          {"covariance", t.covariance},
          {"unconditional_mean", t.unconditional_mean}};
}

Json to_json(const TrialPlan& plan) {
  Json j = {{"protocol", to_string(plan.protocol)},
            {"observable", matrix_to_json(plan.a.matrix())},
            {"lambda", plan.coupling},
            {"psi", to_json(plan.psi)},
            {"trials", plan.trials},
            {"seed", plan.seed},
            {"sampler",
             {{"grid_halfwidth", plan.sampler.grid_halfwidth},
              {"grid_points", plan.sampler.grid_points}}}};
  if (plan.phi) j["phi"] = to_json(*plan.phi);
  if (plan.protocol == Protocol::kSequential && plan.b) {
    j["observable_b"] = matrix_to_json(plan.b->matrix());
    j["lambda_b"] = plan.coupling_b;
    j["order"] = plan.order == SequenceOrder::kAFirst ? "a_first" : "b_first";
  }
  if (plan.protocol == Protocol::kThreshold) j["threshold_multiple"] = plan.threshold_multiple;
  return j;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t canonical_hash(const Json& j) { return fnv1a(j.dump()); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace wmsim::json_io
