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
#include <iostream>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "wmsim/analysis.hpp"
#include "wmsim/cli/dispatch.hpp"
#include "wmsim/cli/table.hpp"
#include "wmsim/collective.hpp"
#include "wmsim/json_io.hpp"
#include "wmsim/lindblad.hpp"
#include "wmsim/montecarlo.hpp"
#include "wmsim/protocols.hpp"

namespace wmsim::cli {
namespace {

using Summary = std::vector<std::pair<std::string, std::string>>;

class Context {
 public:
  Context(const RunConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out) {}

  const Json& param(const char* key) const { return cfg_.params.at(key); }
  bool has(const char* key) const { return cfg_.params.contains(key); }

  Observable observable(const char* key) const {
    return Observable(json_io::matrix_from_json(param(key), key));
  }
  PureState state(const char* key) const {
    return PureState(json_io::vector_from_json(param(key), key));
  }
  double real(const char* key) const { return param(key).get<double>(); }
  std::string text(const char* key) const { return param(key).get<std::string>(); }
  MeterBasis basis(const char* key) const {
    return text(key) == "xprime" ? MeterBasis::kXPrime : MeterBasis::kX;
  }

  /// The lambda grid, or the single lambda as a one-element grid.
  std::vector<double> lambdas() const {
    if (has("lambda_grid")) return param("lambda_grid").get<std::vector<double>>();
    return {real("lambda")};
  }
  bool grid() const { return has("lambda_grid"); }

  /// Nonzero grid required when values are divided by lambda.
  std::vector<double> nonzero_lambdas() const {
    std::vector<double> out = lambdas();
    for (double l : out) {
      if (l == 0.0 && out.size() > 1) {
        throw Error(ErrorCode::kSchemaError, "lambda_grid: entries must be nonzero");
      }
    }
    return out;
  }

  void emit(const Table& table, const std::string& stem) const {
    if (!cfg_.out) return;
    if (cfg_.format == "json") {
      write_file(*cfg_.out / (stem + ".json"),
                 cli::to_json(table, cfg_.hash, cfg_.seed).dump(2) + "\n");
    } else {
      write_file(*cfg_.out / (stem + ".csv"), to_csv(table, cfg_.hash, cfg_.seed));
    }
  }

  void emit_json(Json doc, const std::string& stem) const {
    if (!cfg_.out) return;
    doc["config_hash"] = json_io::hex64(cfg_.hash);
    doc["seed"] = cfg_.seed;
    write_file(*cfg_.out / (stem + ".json"), doc.dump(2) + "\n");
  }

  void summary(const Summary& items) const {
    out_ << "command=" << to_string(cfg_.command);
    for (const auto& [k, v] : items) out_ << ' ' << k << '=' << v;
    out_ << " config_hash=" << json_io::hex64(cfg_.hash) << " seed=" << cfg_.seed << '\n';
  }

  const RunConfig& cfg() const { return cfg_; }

 private:
  const RunConfig& cfg_;
  std::ostream& out_;
};

std::string flag(bool b) { return b ? "true" : "false"; }

// Appends an extrapolation row: first cell "extrapolation", the fitted
// intercepts in `value_columns`, and the largest residual in fit_residual.
void add_extrapolation(Table& t, const std::vector<double>& lambdas,
                       const std::vector<std::pair<std::size_t, std::vector<double>>>& series,
                       std::vector<WeakLimitFit>* fits = nullptr) {
  std::vector<std::string> row(t.columns.size());
  row[0] = "extrapolation";
  double residual = 0.0;
  for (const auto& [column, values] : series) {
    const WeakLimitFit fit = fit_weak_limit(lambdas, values);
    row[column] = number(fit.intercept);
    residual = std::max(residual, fit.residual);
    if (fits) fits->push_back(fit);
  }
  row.back() = number(residual);
  t.add_row(std::move(row));
}

void weak_value_cmd(const Context& c) {
  const Observable a = c.observable("observable");
  const PureState psi = c.state("psi");
  const PureState phi = c.state("phi");
  const WeakValueResult wv = weak_value(a, psi, phi);
  const EigenSystem& es = a.eigensystem();
  const bool anomalous = wv.value.real() < es.eigenvalues.front() - 1e-12 ||
                         wv.value.real() > es.eigenvalues.back() + 1e-12;
  const double mean = expectation(a, psi);
  c.emit_json({{"weak_value", json_io::to_json(wv.value)},
               {"preselect_overlap", json_io::to_json(wv.preselect_overlap)},
               {"postselection_probability", wv.postselection_probability()},
               {"expectation_psi", mean},
               {"anomalous", anomalous}},
              "weak_value");
  c.summary({{"re", number(wv.value.real())},
             {"im", number(wv.value.imag())},
             {"postselection_probability", number(wv.postselection_probability())},
             {"expectation_psi", number(mean)},
             {"anomalous", flag(anomalous)}});
}

void anomalous_cmd(const Context& c) {
  const Observable a = c.observable("observable");
  std::optional<PureState> psi;
  if (c.has("psi")) psi = c.state("psi");
  const WeakValuePart part = c.text("target") == "im" ? WeakValuePart::kImaginary
                                                      : WeakValuePart::kReal;
  const AnomalousPair pair = anomalous_pair(a, c.real("epsilon"), part, psi);
  const WeakValueResult wv = weak_value(a, pair.psi, pair.phi);
  c.emit_json({{"psi", json_io::to_json(pair.psi)},
               {"phi", json_io::to_json(pair.phi)},
               {"perp", json_io::to_json(pair.perp)},
               {"coupling", pair.coupling},
               {"epsilon", pair.epsilon},
               {"weak_value", json_io::to_json(wv.value)},
               {"postselection_probability", pair.postselection_probability}},
              "anomalous");
  c.summary({{"re", number(wv.value.real())},
             {"im", number(wv.value.imag())},
             {"coupling", number(pair.coupling)},
             {"postselection_probability", number(pair.postselection_probability)}});
}

void density_cmd(const Context& c) {
  const Observable a = c.observable("observable");
  const PureState psi = c.state("psi");
  const double lambda = c.real("lambda");
  const MeterBasis basis = c.basis("basis");
  const int points = c.param("grid_points").get<int>();
  const double half = c.real("grid_halfwidth");
  if (points < 2) throw Error(ErrorCode::kSchemaError, "grid_points: need at least 2");

  std::vector<MixtureComponent> parts;
  Summary extra;
  if (c.has("phi")) {
    const ConditionalMeter cm = conditional_meter(
        MeasurementSetup(a, lambda, psi, c.state("phi")), basis);
    parts.push_back({1.0, cm.state});
    extra = {{"probability", number(cm.probability)},
             {"low_probability", flag(cm.low_probability)}};
  } else {
    for (MixtureComponent& m : unconditional_mixture(a, lambda, psi)) {
      if (basis == MeterBasis::kXPrime) m.state = to_xprime_basis(m.state);
      parts.push_back(std::move(m));
    }
  }
  double lo = INFINITY, hi = -INFINITY, mean = 0.0;
  for (const MixtureComponent& m : parts) {
    for (const GaussianTerm& t : m.state.terms()) {
      lo = std::min(lo, t.center);
      hi = std::max(hi, t.center);
    }
    mean += m.probability * moment(m.state, 1);
  }
  lo -= half;
  hi += half;

  Table t{{"x", "density"}, {}};
  double integral = 0.0, previous = 0.0;
  const double step = (hi - lo) / (points - 1);
  for (int i = 0; i < points; ++i) {
    const double x = lo + i * step;
    double v = 0.0;
    for (const MixtureComponent& m : parts) {
      v += m.probability * density(m.state, x) / m.state.squared_norm();
    }
    if (i) integral += 0.5 * step * (v + previous);
    previous = v;
    t.add_row({number(x), number(v)});
  }
  c.emit(t, "density");
  Summary s = {{"basis", c.text("basis")},
               {"lambda", number(lambda)},
               {"integral", number(integral)},
               {"mean", number(mean)}};
  s.insert(s.end(), extra.begin(), extra.end());
  c.summary(s);
}

void postselect_prob_cmd(const Context& c) {
  const Observable a = c.observable("observable");
  const PureState psi = c.state("psi");
  const PureState phi = c.state("phi");
  const std::vector<double> lambdas = c.nonzero_lambdas();
  const WeakValueResult wv = weak_value(a, psi, phi);
  const Complex a2_w = matrix_weak_value(a.matrix() * a.matrix(), psi, phi);
  const double coeff = wv.postselection_probability() * (std::norm(wv.value) - a2_w.real()) / 4.0;

  Table t{{"lambda", "probability", "kick_probability", "unperturbed", "excess_over_lambda2",
           "second_order_coeff", "fit_residual"},
          {}};
  std::vector<double> excess;
  for (double l : lambdas) {
    const MeasurementSetup setup(a, l, psi, phi);
    const double p = postselection_probability(setup);
    const double e = (p - wv.postselection_probability()) / (l * l);
    excess.push_back(e);
    t.add_row({number(l), number(p), number(kick_postselection_probability(setup)),
               number(wv.postselection_probability()), number(e), number(coeff), ""});
  }
  Summary s = {{"unperturbed", number(wv.postselection_probability())},
               {"second_order_coeff", number(coeff)}};
  if (lambdas.size() > 1) {
    std::vector<WeakLimitFit> fits;
    add_extrapolation(t, lambdas, {{4, excess}}, &fits);
    s.push_back({"extrapolated_coeff", number(fits[0].intercept)});
    s.push_back({"fit_residual", number(fits[0].residual)});
  } else {
    s.push_back({"probability", t.rows[0][1]});
  }
  c.emit(t, "postselect_prob");
  c.summary(s);
}

void kick_cmd(const Context& c) {
  const Observable a = c.observable("observable");
  const PureState psi = c.state("psi");
  const PureState phi = c.state("phi");
  const std::vector<double> lambdas = c.nonzero_lambdas();
  const int points = c.param("grid_points").get<int>();
  const WeakValueResult wv = weak_value(a, psi, phi);

  Table t{{"lambda", "kick_probability", "vn_probability", "kick_mean_xprime",
           "vn_mean_xprime", "mean_over_lambda", "max_density_gap", "fit_residual"},
          {}};
  std::vector<double> ratios;
  double worst_density = 0.0, worst_probability = 0.0;
  for (double l : lambdas) {
    const MeasurementSetup setup(a, l, psi, phi);
    const KickModel kick(setup);
    const ConditionalMeter vn = conditional_meter(setup, MeterBasis::kXPrime);
    double gap = 0.0;
    for (int i = 0; i < points; ++i) {
      const double x = -8.0 + 16.0 * i / std::max(points - 1, 1);
      gap = std::max(gap, std::abs(kick.conditional_density(x) - density(vn.state, x)));
    }
    const double mean = kick.conditional_mean();
    ratios.push_back(l != 0.0 ? mean / l : 0.0);
    worst_density = std::max(worst_density, gap);
    worst_probability =
        std::max(worst_probability, std::abs(kick.postselection_probability() - vn.probability));
    t.add_row({number(l), number(kick.postselection_probability()), number(vn.probability),
               number(mean), number(moment(vn.state, 1)), number(ratios.back()), number(gap),
               ""});
  }
  Summary s = {{"im_weak_value", number(wv.value.imag())},
               {"max_density_gap", number(worst_density)},
               {"max_probability_gap", number(worst_probability)}};
  if (lambdas.size() > 1) {
    std::vector<WeakLimitFit> fits;
    add_extrapolation(t, lambdas, {{5, ratios}}, &fits);
    s.push_back({"extrapolated_im_weak_value", number(fits[0].intercept)});
    s.push_back({"fit_residual", number(fits[0].residual)});
  }
  c.emit(t, "kick");
  c.summary(s);
}

void sequential_cmd(const Context& c) {
  const Observable a = c.observable("observable");
  const Observable b = c.observable("observable_b");
  const PureState psi = c.state("psi");
  const PureState phi = c.state("phi");
  const std::vector<double> lambdas = c.nonzero_lambdas();
  const std::array<MeterBasis, 2> bases = {c.basis("basis"), c.basis("basis_b")};
  const SequenceOrder order =
      c.text("order") == "b_first" ? SequenceOrder::kBFirst : SequenceOrder::kAFirst;

  Table t{{"lambda", "lambda_b", "probability", "mean1", "mean2", "covariance", "coefficient",
           "covariance_reversed", "coefficient_reversed", "fit_residual"},
          {}};
  std::vector<double> coeff, coeff_rev;
  std::optional<SequentialSetup> last;
  for (double l : lambdas) {
    const double lb = c.has("lambda_b") ? c.real("lambda_b") : l;
    const SequentialSetup sq(a, l, b, lb, psi, phi, bases, order);
    const SequentialMoments m = sequential_moments(sq);
    const SequentialMoments r = sequential_moments(sq.reversed());
    const double scale = 0.5 * l * lb;
    coeff.push_back(scale != 0.0 ? m.covariance / scale : 0.0);
    coeff_rev.push_back(scale != 0.0 ? r.covariance / scale : 0.0);
    t.add_row({number(l), number(lb), number(m.probability), number(m.mean1), number(m.mean2),
               number(m.covariance), number(coeff.back()), number(r.covariance),
               number(coeff_rev.back()), ""});
    last.emplace(sq);
  }
  Summary s = {{"analytic_coefficient", number(sequential_covariance_coefficient(*last))},
               {"analytic_coefficient_reversed",
                number(sequential_covariance_coefficient(last->reversed()))},
               {"order_gap", number(sequential_order_gap(*last))}};
  if (lambdas.size() > 1) {
    std::vector<WeakLimitFit> fits;
    add_extrapolation(t, lambdas, {{6, coeff}, {8, coeff_rev}}, &fits);
    s.push_back({"extrapolated_coefficient", number(fits[0].intercept)});
    s.push_back({"extrapolated_coefficient_reversed", number(fits[1].intercept)});
    s.push_back({"fit_residual", number(std::max(fits[0].residual, fits[1].residual))});
  }
  c.emit(t, "sequential");
  c.summary(s);
}

void collective_cmd(const Context& c) {
  const Observable a = c.observable("observable");
  const PureState psi = c.state("psi");
  const PureState phi = c.state("phi");
  const double lambda = c.real("lambda");
  const std::vector<int> systems = c.param("systems").get<std::vector<int>>();
  const int points = c.param("grid_points").get<int>();
  const std::string engine_name = c.text("engine");
  const CollectiveEngine engine = engine_name == "expansion" ? CollectiveEngine::kExpansion
                                  : engine_name == "spectral" ? CollectiveEngine::kSpectral
                                                              : CollectiveEngine::kAuto;
  CollectiveLimits limits;
  limits.max_systems = c.param("max_systems").get<int>();
  limits.max_terms = c.param("max_terms").get<double>();

  const Complex aw = weak_value(a, psi, phi).value;
  const double ratio_limit = std::exp(0.5 * lambda * lambda * aw.imag() * aw.imag());
  Table t{{"systems", "metric", "value"}, {}};
  std::vector<double> ns, ratio_gap, mean_gap, sup;
  for (int n : systems) {
    const CollectiveModel model(CollectiveSetup(a, lambda, psi, phi, n, limits), engine);
    const double ratio = model.postselection_ratio();
    const double mean_x = model.conditional_mean(MeterBasis::kX);
    const double mean_xp = model.conditional_mean(MeterBasis::kXPrime);
    double worst = 0.0;
    const double center = lambda * aw.real();
    for (int i = 0; i < points; ++i) {
      const double x = center - 8.0 + 16.0 * i / std::max(points - 1, 1);
      worst = std::max(worst, std::abs(model.conditional_density(MeterBasis::kX, x) -
                                       standard_normal_density(x - center)));
    }
    ns.push_back(n);
    ratio_gap.push_back(ratio - ratio_limit);
    mean_gap.push_back(mean_xp - lambda * aw.imag());
    sup.push_back(worst);
    const std::string sn = number(static_cast<std::uint64_t>(n));
    t.add_row({sn, "engine",
               model.engine() == CollectiveEngine::kExpansion ? "expansion" : "spectral"});
    t.add_row({sn, "log_ratio", number(model.log_postselection_ratio())});
    t.add_row({sn, "ratio", number(ratio)});
    t.add_row({sn, "ratio_limit", number(ratio_limit)});
    t.add_row({sn, "ratio_gap", number(ratio_gap.back())});
    t.add_row({sn, "mean_x", number(mean_x)});
    t.add_row({sn, "mean_xprime", number(mean_xp)});
    t.add_row({sn, "mean_xprime_gap", number(mean_gap.back())});
    t.add_row({sn, "supnorm_x", number(worst)});
  }
  c.emit(t, "collective");
  Summary s = {{"re_weak_value", number(aw.real())},
               {"im_weak_value", number(aw.imag())},
               {"ratio_limit", number(ratio_limit)}};
  if (ns.size() > 1) {
    auto slope = [&](const std::vector<double>& y) {
      const bool usable = std::all_of(y.begin(), y.end(), [](double v) { return v != 0.0; });
      return usable ? number(loglog_slope(ns, y)) : std::string("nan");
    };
    s.push_back({"slope_ratio", slope(ratio_gap)});
    s.push_back({"slope_mean_xprime", slope(mean_gap)});
    s.push_back({"slope_supnorm_x", slope(sup)});
  } else {
    s.push_back({"ratio", number(ratio_gap[0] + ratio_limit)});
  }
  c.summary(s);
}

void lindblad_cmd(const Context& c) {
  const Observable a = c.observable("observable");
  const PureState psi = c.state("psi");
  const PureState phi = c.state("phi");
  const std::vector<double> lambdas = c.nonzero_lambdas();
  const Complex aw = weak_value(a, psi, phi).value;

  if (!c.grid()) {
    const double l = lambdas[0];
    const KrausFamily family(a, l);
    const int points = c.param("grid_points").get<int>();
    const double half = 10.0 + family.reach();
    Table t{{"x", "joint", "pw", "error"}, {}};
    double identity = 0.0;
    for (int i = 0; i < points; ++i) {
      const double x = -half + 2.0 * half * i / std::max(points - 1, 1);
      const DecompositionSample d = decompose(family, psi, phi, x);
      identity = std::max(identity, std::abs(d.joint_p - d.pw - d.error));
      t.add_row({number(x), number(d.joint_p), number(d.pw), number(d.error)});
    }
    c.emit(t, "decomposition");
    const DecompositionIntegrals in = decomposition_integrals(a, l, psi, phi);
    Summary s = {{"lambda", number(l)},
                 {"max_identity_residual", number(identity)},
                 {"integral_joint", number(in.joint)},
                 {"integral_pw", number(in.pw)},
                 {"integral_error", number(in.error)},
                 {"mean_pw", number(in.pw_first / in.pw)},
                 {"lambda_re_weak_value", number(l * aw.real())}};
    if (l != 0.0) {
      const GdiReport g = gdi_diagnostic(a, l, psi, phi);
      c.emit_json(json_io::to_json(g), "gdi");
      s.push_back({"mean_full", number(g.mean_full)});
      s.push_back({"mean_gap", number(g.mean_gap)});
      s.push_back({"max_error_over_lambda2", number(g.max_error_over_lambda2)});
    }
    c.summary(s);
    return;
  }

  Table t{{"lambda", "max_error_over_lambda2", "integrated_error_over_lambda2",
           "predicted_integrated_error_over_lambda2", "mean_full", "mean_pw", "mean_gap",
           "fit_residual"},
          {}};
  std::vector<double> integrated;
  double predicted = 0.0;
  for (double l : lambdas) {
    const GdiReport g = gdi_diagnostic(a, l, psi, phi);
    integrated.push_back(g.integrated_error_over_lambda2);
    predicted = g.predicted_integrated_error_over_lambda2;
    t.add_row({number(l), number(g.max_error_over_lambda2),
               number(g.integrated_error_over_lambda2),
               number(g.predicted_integrated_error_over_lambda2), number(g.mean_full),
               number(g.mean_pw), number(g.mean_gap), ""});
  }
  std::vector<WeakLimitFit> fits;
  add_extrapolation(t, lambdas, {{2, integrated}}, &fits);
  c.emit(t, "gdi");
  c.summary({{"predicted_integrated_error_over_lambda2", number(predicted)},
             {"extrapolated_integrated_error_over_lambda2", number(fits[0].intercept)},
             {"fit_residual", number(fits[0].residual)}});
}

void disturbance_cmd(const Context& c) {
  const Observable a = c.observable("observable");
  const PureState psi = c.state("psi");
  const PureState phi = c.state("phi");
  const std::vector<double> lambdas = c.nonzero_lambdas();
  if (!c.grid()) {
    const DisturbanceReport r = disturbance_report(MeasurementSetup(a, lambdas[0], psi, phi));
    c.emit_json(json_io::to_json(r), "disturbance");
    c.summary({{"lambda", number(lambdas[0])},
               {"postselect_prob_exact", number(r.postselect_prob_exact)},
               {"postselect_prob_unperturbed", number(r.postselect_prob_unperturbed)},
               {"nonselective_purity", number(r.nonselective_purity)},
               {"fidelity_to_initial", number(r.fidelity_to_initial)},
               {"identity_residual", number(r.identity_residual)}});
    return;
  }
  Table t{{"lambda", "postselect_prob_exact", "postselect_prob_unperturbed",
           "excess_over_lambda2", "second_order_coeff", "nonselective_purity",
           "fidelity_to_initial", "identity_residual", "fit_residual"},
          {}};
  std::vector<double> excess;
  double coeff = 0.0, residual = 0.0;
  for (double l : lambdas) {
    const DisturbanceReport r = disturbance_report(MeasurementSetup(a, l, psi, phi));
    excess.push_back((r.postselect_prob_exact - r.postselect_prob_unperturbed) / (l * l));
    coeff = r.second_order_coeff;
    residual = std::max(residual, r.identity_residual);
    t.add_row({number(l), number(r.postselect_prob_exact), number(r.postselect_prob_unperturbed),
               number(excess.back()), number(r.second_order_coeff),
               number(r.nonselective_purity), number(r.fidelity_to_initial),
               number(r.identity_residual), ""});
  }
  std::vector<WeakLimitFit> fits;
  add_extrapolation(t, lambdas, {{3, excess}}, &fits);
  c.emit(t, "disturbance");
  c.summary({{"second_order_coeff", number(coeff)},
             {"extrapolated_coeff", number(fits[0].intercept)},
             {"max_identity_residual", number(residual)},
             {"fit_residual", number(fits[0].residual)}});
}

TrialPlan make_plan(const Context& c, Protocol protocol) {
  TrialPlan plan{.protocol = protocol,
                 .a = c.observable("observable"),
                 .coupling = c.real("lambda"),
                 .psi = c.state("psi"),
                 .phi = std::nullopt,
                 .b = std::nullopt};
  if (c.has("phi")) plan.phi = c.state("phi");
  if (c.has("observable_b")) plan.b = c.observable("observable_b");
  plan.coupling_b = c.has("lambda_b") ? c.real("lambda_b") : plan.coupling;
  if (c.has("order") && c.text("order") == "b_first") plan.order = SequenceOrder::kBFirst;
  plan.threshold_multiple = c.real("threshold_multiple");
  plan.trials = c.param("trials").get<std::uint64_t>();
  plan.seed = c.cfg().seed;
  plan.threads = c.cfg().threads;
  plan.keep_records = c.param("keep_records").get<bool>();
  plan.sampler.grid_points = c.param("sampler_grid_points").get<int>();
  plan.sampler.grid_halfwidth = c.real("sampler_grid_halfwidth");
  plan.sampler.seed = c.cfg().seed;
  return plan;
}

void emit_run(const Context& c, const TrialPlan& plan, const TrialResult& result,
              const AnalyticTargets& targets, Json extra) {
  const bool two = plan.protocol == Protocol::kSequential;
  if (plan.keep_records) {
    Table t;
    t.columns = two ? std::vector<std::string>{"trial", "x", "x2", "postselected"}
                    : std::vector<std::string>{"trial", "x", "postselected"};
    t.rows.reserve(result.records.size());
    for (std::size_t i = 0; i < result.records.size(); ++i) {
      const ExperimentRecord& r = result.records[i];
      if (two) {
        t.rows.push_back({number(static_cast<std::uint64_t>(i)), number(r.x), number(r.x2),
                          r.postselected ? "1" : "0"});
      } else {
        t.rows.push_back(
            {number(static_cast<std::uint64_t>(i)), number(r.x), r.postselected ? "1" : "0"});
      }
    }
    c.emit(t, "records");
  }
  Json doc = {{"protocol", json_io::to_string(plan.protocol)},
              {"plan_hash", json_io::hex64(json_io::canonical_hash(json_io::to_json(plan)))},
              {"stats", json_io::to_json(result.stats)},
              {"analytic", json_io::to_json(targets)}};
  for (auto& [k, v] : extra.items()) doc[k] = v;
  c.emit_json(doc, "stats");
}

Summary run_summary(const TrialPlan& plan, const TrialResult& result,
                    const AnalyticTargets& targets) {
  const TrialStatistics& s = result.stats;
  Summary out = {{"protocol", std::string(json_io::to_string(plan.protocol))},
                 {"plan_hash", json_io::hex64(json_io::canonical_hash(json_io::to_json(plan)))},
                 {"n_total", number(s.n_total)},
                 {"n_postselected", number(s.n_postselected)},
                 {"rate", number(s.postselection_rate)},
                 {"rate_se", number(s.rate_standard_error)},
                 {"rate_analytic", number(targets.postselection_rate)}};
  for (std::size_t i = 0; i < s.conditional_means.size(); ++i) {
    const std::string suffix = i == 0 ? "" : std::to_string(i + 1);
    out.push_back({"mean" + suffix, number(s.conditional_means[i])});
    out.push_back({"se" + suffix, number(s.standard_errors[i])});
    out.push_back({"mean" + suffix + "_analytic", number(targets.conditional_means[i])});
  }
  if (plan.protocol == Protocol::kSequential) {
    out.push_back({"covariance", number(s.covariance)});
    out.push_back({"covariance_se", number(s.covariance_standard_error)});
    out.push_back({"covariance_analytic", number(targets.covariance)});
  }
  out.push_back({"unconditional_mean", number(s.unconditional_mean)});
  out.push_back({"unconditional_se", number(s.unconditional_standard_error)});
  return out;
}

Protocol protocol_from(const std::string& name) {
  if (name == "kick") return Protocol::kKick;
  if (name == "sequential") return Protocol::kSequential;
  if (name == "threshold") return Protocol::kThreshold;
  return Protocol::kSingle;
}

void simulate_cmd(const Context& c) {
  const TrialPlan plan = make_plan(c, protocol_from(c.text("protocol")));
  const TrialResult result = run(plan);
  const AnalyticTargets targets = analytic_targets(plan);
  emit_run(c, plan, result, targets, Json::object());
  c.summary(run_summary(plan, result, targets));
}

void threshold_cmd(const Context& c) {
  const TrialPlan plan = make_plan(c, Protocol::kThreshold);
  const TrialResult result = run(plan);
  const AnalyticTargets targets = analytic_targets(plan);
  const double limit = std::sqrt(2.0 / std::numbers::pi);
  emit_run(c, plan, result, targets,
           {{"threshold", plan.threshold_multiple * plan.coupling},
            {"small_coupling_limit", limit}});
  Summary s = run_summary(plan, result, targets);
  s.push_back({"threshold", number(plan.threshold_multiple * plan.coupling)});
  s.push_back({"small_coupling_limit", number(limit)});
  c.summary(s);
}

}  // namespace

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSchemaError:
    case ErrorCode::kFileError:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kNotHermitian:
    case ErrorCode::kNotNormalized:
    case ErrorCode::kDimensionMismatch:
      return kExitConfig;
    case ErrorCode::kNumericQuality:
    case ErrorCode::kGridTooCoarse:
      return kExitNumeric;
    case ErrorCode::kOrthogonalPostselection:
    case ErrorCode::kProportionalToIdentity:
    case ErrorCode::kBasisMismatch:
    case ErrorCode::kZeroProbabilityOutcome:
    case ErrorCode::kTermBudgetExceeded:
    case ErrorCode::kNoPostselectedRuns:
      return kExitDomain;
  }
  return kExitDomain;
}

void dispatch(const RunConfig& cfg, std::ostream& out) {
  const Context c(cfg, out);
  switch (cfg.command) {
    case Command::kWeakValue: return weak_value_cmd(c);
    case Command::kDensity: return density_cmd(c);
    case Command::kPostselectProb: return postselect_prob_cmd(c);
    case Command::kKick: return kick_cmd(c);
    case Command::kSequential: return sequential_cmd(c);
    case Command::kCollective: return collective_cmd(c);
    case Command::kLindblad: return lindblad_cmd(c);
    case Command::kDisturbance: return disturbance_cmd(c);
    case Command::kSimulate: return simulate_cmd(c);
    case Command::kAnomalous: return anomalous_cmd(c);
    case Command::kThreshold: return threshold_cmd(c);
  }
}

int run_guarded(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    dispatch(cfg, out);
    return kExitSuccess;
  } catch (const Error& e) {
    err << "wmsim: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "wmsim: internal error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace wmsim::cli
