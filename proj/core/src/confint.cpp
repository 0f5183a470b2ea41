// Copyright 2026 The lowprev Authors
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

#include "lowprev/confint.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lowprev/envelope.hpp"
#include "lowprev/error.hpp"
#include "lowprev/parallel.hpp"
#include "lowprev/rng.hpp"
#include "lowprev/sampling.hpp"

namespace lowprev {

namespace {

struct MeanSd {
  double mean;
  double sd;
};

// Two-pass, in index order.
MeanSd mean_sd(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

void check_plan(const LowerPrevisionProblem& problem, const DirichletParams& sampling, const ReplicationPlan& plan) {
  if (plan.replications < 2) throw_domain_error("confidence interval needs at least 2 replications");
  if (plan.sample_size < 2) throw_domain_error("confidence interval needs batches of at least 2 points");
  if (!(plan.level > 0.0 && plan.level < 1.0)) throw_domain_error("confidence level must lie in (0, 1)");
  if (sampling.mean.size() != problem.feasible.dimension()) {
    throw_domain_error("sampling distribution and parameter set differ in dimension");
  }
}

template <class Fn>
void run_replications(const ReplicationPlan& plan, Fn&& fn) {
  parallel_for(plan.replications, plan.threads, [&](std::size_t r) {
    try {
      fn(r);
    } catch (const Error& e) {
      throw Error(e.kind(), "replication " + std::to_string(r) + ": " + e.what());
    }
  });
}

ReplicationValues sized(std::size_t count) {
  ReplicationValues v;
  v.lower.resize(count);
  v.upper.resize(count);
  v.taus.resize(count);
  v.ess.resize(count);
  return v;
}

}  // namespace

ConfidenceInterval interval_from_replications(const ReplicationValues& values, double level, std::size_t sample_size,
                                              IntervalMethod method) {
  const std::size_t count = values.lower.size();
  if (count < 2) throw_domain_error("confidence interval needs at least 2 replications");
  if (values.upper.size() != count) throw_domain_error("lower and upper replication counts differ");

  const double crit = t_critical(count - 1, level);
  const double root = std::sqrt(static_cast<double>(count));
  const MeanSd lower = mean_sd(values.lower);
  const MeanSd upper = mean_sd(values.upper);

  ConfidenceInterval ci;
  ci.level = level;
  ci.method = method;
  ci.replications = count;
  ci.sample_size = sample_size;
  ci.mean_lower = lower.mean;
  ci.mean_upper = upper.mean;
  ci.sd_lower = lower.sd;
  ci.sd_upper = upper.sd;
  ci.lo = lower.mean - crit * lower.sd / root;
  ci.hi = upper.mean + crit * upper.sd / root;
  ci.empty = ci.lo > ci.hi;

  if (!values.taus.empty()) {
    ci.mean_tau.assign(values.taus.front().size(), 0.0);
    for (const auto& tau : values.taus) {
      for (std::size_t j = 0; j < tau.size(); ++j) ci.mean_tau[j] += tau[j];
    }
    for (double& t : ci.mean_tau) t /= static_cast<double>(values.taus.size());
  }
  if (!values.ess.empty()) {
    double total = 0.0;
    for (double e : values.ess) total += e;
    ci.mean_ess = std::clamp(total / static_cast<double>(values.ess.size()), 1.0,
                             static_cast<double>(std::max<std::size_t>(sample_size, 1)));
  }
  return ci;
}

ConfidenceInterval confidence_interval_exact(const LowerPrevisionProblem& problem, const DirichletParams& sampling,
                                             const ReplicationPlan& plan, const OptimizerConfig& config) {
  check_plan(problem, sampling, plan);
  ReplicationValues out = sized(plan.replications);
  const double s = problem.concentration;

  run_replications(plan, [&](std::size_t r) {
    const SampleBatch x = sample_dirichlet(sampling, plan.sample_size, derive_seed(plan.master_seed, r, Stream::primary()));
    const SampleBatch xp = sample_dirichlet(sampling, plan.sample_size, derive_seed(plan.master_seed, r, Stream::paired()));
    const std::vector<double> fx = evaluate_gamble(problem.gamble, x);
    const std::vector<double> fxp = evaluate_gamble(problem.gamble, xp);

    const EnvelopeResult low = envelope_argmin(x, fx, s, problem.feasible, config);
    const EnvelopeResult other = envelope_argmin(xp, fxp, s, problem.feasible, config);
    out.lower[r] = low.value;
    out.upper[r] = upper_estimate(x, other.tau, fx, s, problem.feasible);
    out.taus[r] = low.tau;
    out.ess[r] = low.ess_at_tau;
  });
  return interval_from_replications(out, plan.level, plan.sample_size, IntervalMethod::exact);
}

ConfidenceInterval confidence_interval_fast(const LowerPrevisionProblem& problem, const DirichletParams& sampling,
                                            const ReplicationPlan& plan, const OptimizerConfig& config) {
  check_plan(problem, sampling, plan);
  ReplicationValues out = sized(plan.replications);
  const double s = problem.concentration;

  run_replications(plan, [&](std::size_t r) {
    const SampleBatch x = sample_dirichlet(sampling, plan.sample_size, derive_seed(plan.master_seed, r, Stream::primary()));
    const SampleBatch xp = sample_dirichlet(sampling, plan.sample_size, derive_seed(plan.master_seed, r, Stream::paired()));
    const std::vector<double> fx = evaluate_gamble(problem.gamble, x);
    const std::vector<double> fxp = evaluate_gamble(problem.gamble, xp);

    const EnvelopeResult low = envelope_argmin(x, fx, s, problem.feasible, config);
    out.lower[r] = low.value;
    out.upper[r] = upper_estimate(xp, low.tau, fxp, s, problem.feasible);
    out.taus[r] = low.tau;
    out.ess[r] = low.ess_at_tau;
  });
  return interval_from_replications(out, plan.level, plan.sample_size, IntervalMethod::fast);
}

ConfidenceInterval confidence_interval_biased(const ConfidenceInterval& interval, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw_domain_error("bias bound must be finite and nonnegative");
  ConfidenceInterval widened = interval;
  widened.lo = interval.lo - beta;
  widened.hi = interval.hi + beta;
  widened.beta = interval.beta + beta;
  widened.empty = widened.lo > widened.hi;
  return widened;
}

ConfidenceInterval direct_mean_ci(const LowerPrevisionProblem& problem, std::span<const double> t,
                                  std::size_t total_samples, double level, std::uint64_t master_seed) {
  if (total_samples < 2) throw_domain_error("direct interval needs at least 2 draws");
  if (t.size() != problem.feasible.dimension()) throw_domain_error("parameter and parameter set differ in dimension");
  const DirichletParams target = make_dirichlet(problem.concentration, t);
  const SampleBatch batch = sample_dirichlet(target, total_samples, derive_seed(master_seed, 0, Stream::direct()));
  const std::vector<double> f = evaluate_gamble(problem.gamble, batch);
  const MeanSd stats = mean_sd(f);
  const double half = t_critical(total_samples - 1, level) * stats.sd / std::sqrt(static_cast<double>(total_samples));

  ConfidenceInterval ci;
  ci.level = level;
  ci.method = IntervalMethod::direct;
  ci.replications = 1;
  ci.sample_size = total_samples;
  ci.mean_lower = stats.mean;
  ci.mean_upper = stats.mean;
  ci.sd_lower = stats.sd;
  ci.sd_upper = stats.sd;
  ci.lo = stats.mean - half;
  ci.hi = stats.mean + half;
  ci.mean_tau = target.mean;
  ci.mean_ess = static_cast<double>(total_samples);
  return ci;
}

}  // namespace lowprev
