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

#include "wmsim/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "wmsim/analysis.hpp"
#include "wmsim/rng.hpp"

namespace wmsim {
namespace {

constexpr double kNegligible = 1e-28;

struct Component {
  double eigenvalue;
  double weight;  // |P_i psi|^2
  Vector vector;  // P_i psi
};

std::vector<Component> components(const Observable& a, const PureState& psi) {
  const EigenSystem& es = a.eigensystem();
  std::vector<Component> out;
  for (std::size_t i = 0; i < es.size(); ++i) {
    Vector v = es.projectors[i] * psi.amplitudes();
    const double w = v.squaredNorm();
    if (w > kNegligible) out.push_back({es.eigenvalues[i], w, std::move(v)});
  }
  return out;
}

// Gaussian factors sqrt G(x - lambda a_i) scaled so the largest is 1.
void relative_factors(const std::vector<double>& eigenvalues, double coupling,
                      double x, std::vector<double>& out) {
  double top = -INFINITY;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    const double u = x - coupling * eigenvalues[i];
    out[i] = -0.25 * u * u;
    top = std::max(top, out[i]);
  }
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) out[i] = std::exp(out[i] - top);
}

std::size_t pick(const std::vector<double>& cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1);
}

std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) c[i] = (total += p[i]);
  for (double& v : c) v /= total;
  return c;
}

double standard_normal(StreamRng& rng) {
  std::normal_distribution<double> nd;
  return nd(rng);
}

struct ChunkResult {
  std::uint64_t selected = 0;
  CompensatedSum ux, uxx;
  CompensatedSum sx, sxx, sy, syy;
  std::vector<ExperimentRecord> records;
  std::vector<std::pair<double, double>> pairs;
};

// Runs `trial(index, workspace)` over all trials in fixed-size chunks.
template <typename MakeWorkspace, typename Trial>
TrialResult drive(const TrialPlan& plan, bool two_meters, MakeWorkspace make_workspace,
                  Trial trial) {
  const std::uint64_t chunks = (plan.trials + kTrialChunk - 1) / kTrialChunk;
  std::vector<ChunkResult> results(chunks);
  std::atomic<std::uint64_t> next{0};

  auto worker = [&] {
    auto ws = make_workspace();
    for (std::uint64_t c = next++; c < chunks; c = next++) {
      ChunkResult& r = results[c];
      const std::uint64_t begin = c * kTrialChunk;
      const std::uint64_t end = std::min(plan.trials, begin + kTrialChunk);
      if (plan.keep_records) r.records.reserve(end - begin);
      for (std::uint64_t i = begin; i < end; ++i) {
        const ExperimentRecord rec = trial(i, ws);
        r.ux += rec.x;
        r.uxx += rec.x * rec.x;
        if (rec.postselected) {
          ++r.selected;
          r.sx += rec.x;
          r.sxx += rec.x * rec.x;
          if (two_meters) {
            r.sy += rec.x2;
            r.syy += rec.x2 * rec.x2;
            r.pairs.emplace_back(rec.x, rec.x2);
          }
        }
        if (plan.keep_records) r.records.push_back(rec);
      }
    }
  };

  const unsigned threads =
      static_cast<unsigned>(std::min<std::uint64_t>(std::max(plan.threads, 1u), chunks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  TrialResult out;
  ChunkResult total;
  for (ChunkResult& r : results) {
    total.selected += r.selected;
    total.ux.merge(r.ux);
    total.uxx.merge(r.uxx);
    total.sx.merge(r.sx);
    total.sxx.merge(r.sxx);
    total.sy.merge(r.sy);
    total.syy.merge(r.syy);
    if (plan.keep_records) {
      out.records.insert(out.records.end(), r.records.begin(), r.records.end());
    }
    if (two_meters) total.pairs.insert(total.pairs.end(), r.pairs.begin(), r.pairs.end());
  }

  TrialStatistics& s = out.stats;
  s.n_total = plan.trials;
  s.n_postselected = total.selected;
  if (total.selected == 0) {
    throw Error(ErrorCode::kNoPostselectedRuns, "no run passed the selection");
  }
  const double n = static_cast<double>(plan.trials);
  const double m = static_cast<double>(total.selected);
  s.postselection_rate = m / n;
  s.rate_standard_error = std::sqrt(s.postselection_rate * (1.0 - s.postselection_rate) / n);

  auto mean_and_se = [](double sum, double sum_sq, double count) {
    const double mean = sum / count;
    if (count < 2.0) return std::pair{mean, 0.0};
    const double var = std::max(0.0, (sum_sq - sum * mean) / (count - 1.0));
    return std::pair{mean, std::sqrt(var / count)};
  };
  std::tie(s.unconditional_mean, s.unconditional_standard_error) =
      mean_and_se(total.ux.value(), total.uxx.value(), n);
  const auto [mx, sex] = mean_and_se(total.sx.value(), total.sxx.value(), m);
  s.conditional_means.push_back(mx);
  s.standard_errors.push_back(sex);

  if (two_meters) {
    const auto [my, sey] = mean_and_se(total.sy.value(), total.syy.value(), m);
    s.conditional_means.push_back(my);
    s.standard_errors.push_back(sey);
    // Centered data; the delete-one covariance follows in closed form.
    CompensatedSum cxy;
    for (const auto& [x, y] : total.pairs) cxy += (x - mx) * (y - my);
    const double c = cxy.value();
    s.covariance = c / m;
    if (total.selected >= 2) {
      std::vector<double> loo;
      loo.reserve(total.pairs.size());
      CompensatedSum loo_sum;
      for (const auto& [x, y] : total.pairs) {
        const double p = (x - mx) * (y - my);
        const double v = (c - p) / (m - 1.0) - p / ((m - 1.0) * (m - 1.0));
        loo.push_back(v);
        loo_sum += v;
      }
      const double loo_mean = loo_sum.value() / m;
      CompensatedSum dev;
      for (double v : loo) dev += (v - loo_mean) * (v - loo_mean);
      s.covariance_standard_error = std::sqrt((m - 1.0) / m * dev.value());
    }
  }
  return out;
}

struct NoWorkspace {};

}  // namespace

void TrialPlan::validate() const {
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
  if (!std::isfinite(coupling)) {
    throw Error(ErrorCode::kInvalidArgument, "coupling must be finite");
  }
  require_same_dimension(a.dim(), psi.dim(), "observable and psi");
  sampler.validate();
  if (protocol == Protocol::kThreshold) {
    if (!std::isfinite(threshold_multiple)) {
      throw Error(ErrorCode::kInvalidArgument, "threshold multiple must be finite");
    }
    return;
  }
  if (!phi) throw Error(ErrorCode::kInvalidArgument, "post-selection state missing");
  require_same_dimension(psi.dim(), phi->dim(), "psi and phi");
  if (std::abs(phi->amplitudes().dot(psi.amplitudes())) <= kOrthogonalityTolerance) {
    throw Error(ErrorCode::kOrthogonalPostselection,
                "orthogonal post-selection: |<phi|psi>| <= 1e-10");
  }
  if (protocol == Protocol::kSequential) {
    if (!b) throw Error(ErrorCode::kInvalidArgument, "sequential plan needs observable B");
    require_same_dimension(a.dim(), b->dim(), "observables A and B");
    if (!std::isfinite(coupling_b)) {
      throw Error(ErrorCode::kInvalidArgument, "coupling_b must be finite");
    }
  }
}

TrialResult run_single(const TrialPlan& plan) {
  plan.validate();
  if (plan.protocol != Protocol::kSingle) {
    throw Error(ErrorCode::kInvalidArgument, "plan is not a single-measurement plan");
  }
  const std::vector<MixtureComponent> mixture =
      unconditional_mixture(plan.a, plan.coupling, plan.psi);
  const PointerSampler sampler(mixture, plan.sampler);
  std::vector<double> eig, norms;
  std::vector<Complex> overlaps;
  for (const Component& c : components(plan.a, plan.psi)) {
    eig.push_back(c.eigenvalue);
    norms.push_back(c.weight);
    overlaps.push_back(plan.phi->amplitudes().dot(c.vector));
  }
  const double lam = plan.coupling;
  return drive(
      plan, false, [&] { return std::vector<double>(eig.size()); },
      [&](std::uint64_t i, std::vector<double>& s) {
        StreamRng rng(plan.seed, 0, i);
        const double x = sampler.quantile(rng.uniform());
        // chi_x = sum_i s_i P_i psi; success probability |<phi|chi_x>|^2.
        relative_factors(eig, lam, x, s);
        Complex num = 0.0;
        double den = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k) {
          num += s[k] * overlaps[k];
          den += s[k] * s[k] * norms[k];
        }
        const bool ok = rng.uniform() < std::norm(num) / den;
        return ExperimentRecord{x, 0.0, ok};
      });
}

TrialResult run_kick(const TrialPlan& plan) {
  plan.validate();
  if (plan.protocol != Protocol::kKick) {
    throw Error(ErrorCode::kInvalidArgument, "plan is not a kick plan");
  }
  std::vector<double> eig;
  std::vector<Complex> overlaps;
  for (const Component& c : components(plan.a, plan.psi)) {
    eig.push_back(c.eigenvalue);
    overlaps.push_back(plan.phi->amplitudes().dot(c.vector));
  }
  const double lam = plan.coupling;
  return drive(
      plan, false, [] { return NoWorkspace{}; },
      [&](std::uint64_t i, NoWorkspace&) {
        StreamRng rng(plan.seed, 0, i);
        // x' is fixed before the kick and never changed afterwards.
        const double xp = standard_normal(rng);
        Complex amp = 0.0;
        for (std::size_t k = 0; k < eig.size(); ++k) {
          amp += overlaps[k] * std::polar(1.0, -0.5 * lam * eig[k] * xp);
        }
        const bool ok = rng.uniform() < std::norm(amp);
        return ExperimentRecord{xp, 0.0, ok};
      });
}

TrialResult run_sequential(const TrialPlan& plan) {
  plan.validate();
  if (plan.protocol != Protocol::kSequential) {
    throw Error(ErrorCode::kInvalidArgument, "plan is not a sequential plan");
  }
  const bool a_first = plan.order == SequenceOrder::kAFirst;
  const Observable& first = a_first ? plan.a : *plan.b;
  const Observable& second = a_first ? *plan.b : plan.a;
  const double lam1 = a_first ? plan.coupling : plan.coupling_b;
  const double lam2 = a_first ? plan.coupling_b : plan.coupling;

  // First measurement: branch i with probability |P_i psi|^2.
  const std::vector<Component> comps = components(first, plan.psi);
  std::vector<double> f_eig, f_prob;
  for (const Component& c : comps) {
    f_eig.push_back(c.eigenvalue);
    f_prob.push_back(c.weight);
  }
  const std::vector<double> f_cum = cumulative(f_prob);
  const std::size_t k1 = comps.size();

  // Second measurement: w_ji = Q_j P_i psi enters through its Gram matrix and
  // its overlap with phi.
  const EigenSystem& es2 = second.eigensystem();
  const std::size_t k2 = es2.size();
  std::vector<double> s_eig = es2.eigenvalues;
  std::vector<Complex> gram(k2 * k1 * k1), post(k2 * k1);
  for (std::size_t j = 0; j < k2; ++j) {
    std::vector<Vector> w;
    for (const Component& c : comps) w.push_back(es2.projectors[j] * c.vector);
    for (std::size_t i = 0; i < k1; ++i) {
      post[j * k1 + i] = plan.phi->amplitudes().dot(w[i]);
      for (std::size_t l = 0; l < k1; ++l) gram[(j * k1 + i) * k1 + l] = w[i].dot(w[l]);
    }
  }

  struct Workspace {
    std::vector<double> s, t, q;
  };
  return drive(
      plan, true,
      [&] { return Workspace{std::vector<double>(k1), std::vector<double>(k2),
                             std::vector<double>(k2)}; },
      [&](std::uint64_t idx, Workspace& ws) {
        StreamRng rng(plan.seed, 0, idx);
        const std::size_t i = pick(f_cum, rng.uniform());
        const double x1 = lam1 * f_eig[i] + standard_normal(rng);
        relative_factors(f_eig, lam1, x1, ws.s);

        // q_j = |Q_j chi_1|^2 up to a common factor.
        double total = 0.0;
        for (std::size_t j = 0; j < k2; ++j) {
          Complex v = 0.0;
          for (std::size_t a = 0; a < k1; ++a) {
            for (std::size_t b = 0; b < k1; ++b) {
              v += ws.s[a] * ws.s[b] * gram[(j * k1 + a) * k1 + b];
            }
          }
          ws.q[j] = std::max(v.real(), 0.0);
          total += ws.q[j];
        }
        const double u = rng.uniform() * total;
        std::size_t j = 0;
        for (double acc = ws.q[0]; j + 1 < k2 && u >= acc; acc += ws.q[++j]) {
        }
        const double x2 = lam2 * s_eig[j] + standard_normal(rng);
        relative_factors(s_eig, lam2, x2, ws.t);

        Complex num = 0.0;
        double den = 0.0;
        for (std::size_t jj = 0; jj < k2; ++jj) {
          Complex inner = 0.0;
          for (std::size_t a = 0; a < k1; ++a) inner += ws.s[a] * post[jj * k1 + a];
          num += ws.t[jj] * inner;
          den += ws.t[jj] * ws.t[jj] * ws.q[jj];
        }
        const bool ok = rng.uniform() < std::norm(num) / den;
        return a_first ? ExperimentRecord{x1, x2, ok} : ExperimentRecord{x2, x1, ok};
      });
}

TrialResult run_threshold(const TrialPlan& plan) {
  plan.validate();
  if (plan.protocol != Protocol::kThreshold) {
    throw Error(ErrorCode::kInvalidArgument, "plan is not a threshold plan");
  }
  const PointerSampler sampler(unconditional_mixture(plan.a, plan.coupling, plan.psi),
                               plan.sampler);
  const double cut = plan.threshold_multiple * plan.coupling;
  return drive(
      plan, false, [] { return NoWorkspace{}; },
      [&](std::uint64_t i, NoWorkspace&) {
        StreamRng rng(plan.seed, 0, i);
        const double x = sampler.quantile(rng.uniform());
        return ExperimentRecord{x, 0.0, x >= cut};
      });
}

TrialResult run(const TrialPlan& plan) {
  switch (plan.protocol) {
    case Protocol::kSingle: return run_single(plan);
    case Protocol::kKick: return run_kick(plan);
    case Protocol::kSequential: return run_sequential(plan);
    case Protocol::kThreshold: return run_threshold(plan);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown protocol");
}

double threshold_prediction(const Observable& a, double coupling, const PureState& psi,
                            double threshold) {
  double mass = 0.0;
  double first = 0.0;
  for (const Component& c : components(a, psi)) {
    const double mu = coupling * c.eigenvalue;
    const double z = threshold - mu;
    const double tail = 0.5 * std::erfc(z / std::numbers::sqrt2);
    mass += c.weight * tail;
    first += c.weight * (mu * tail + standard_normal_density(z));
  }
  if (!(mass > 0.0)) {
    throw Error(ErrorCode::kNoPostselectedRuns, "threshold leaves no probability mass");
  }
  return first / mass;
}

AnalyticTargets analytic_targets(const TrialPlan& plan) {
  plan.validate();
  AnalyticTargets t{};
  switch (plan.protocol) {
    case Protocol::kSingle: {
      const MeasurementSetup setup(plan.a, plan.coupling, plan.psi, *plan.phi);
      t.postselection_rate = postselection_probability(setup);
      t.conditional_means = {conditional_mean(setup, MeterBasis::kX)};
      t.unconditional_mean = plan.coupling * expectation(plan.a, plan.psi);
      break;
    }
    case Protocol::kKick: {
      const MeasurementSetup setup(plan.a, plan.coupling, plan.psi, *plan.phi);
      t.postselection_rate = postselection_probability(setup);
      t.conditional_means = {conditional_mean(setup, MeterBasis::kXPrime)};
      t.unconditional_mean = 0.0;
      break;
    }
    case Protocol::kSequential: {
      const SequentialSetup sq(plan.a, plan.coupling, *plan.b, plan.coupling_b, plan.psi,
                               *plan.phi, {MeterBasis::kX, MeterBasis::kX}, plan.order);
      const SequentialMoments m = sequential_moments(sq);
      t.postselection_rate = m.probability;
      t.conditional_means = {m.mean1, m.mean2};
      t.covariance = m.covariance;
      if (plan.order == SequenceOrder::kAFirst) {
        t.unconditional_mean = plan.coupling * expectation(plan.a, plan.psi);
      } else {
        const DensityMatrix rho = nonselective_state(*plan.b, plan.coupling_b, plan.psi);
        t.unconditional_mean =
            plan.coupling * (rho.matrix() * plan.a.matrix()).trace().real();
      }
      break;
    }
    case Protocol::kThreshold: {
      const double cut = plan.threshold_multiple * plan.coupling;
      double rate = 0.0;
      for (const MixtureComponent& c : unconditional_mixture(plan.a, plan.coupling, plan.psi)) {
        const double mu = c.state.terms()[0].center;
        rate += c.probability * 0.5 * std::erfc((cut - mu) / std::numbers::sqrt2);
      }
      t.postselection_rate = rate;
      t.conditional_means = {threshold_prediction(plan.a, plan.coupling, plan.psi, cut)};
      t.unconditional_mean = plan.coupling * expectation(plan.a, plan.psi);
      break;
    }
  }
  return t;
}

}  // namespace wmsim
