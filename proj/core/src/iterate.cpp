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

#include "lowprev/iterate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "lowprev/envelope.hpp"
#include "lowprev/parallel.hpp"
#include "lowprev/rng.hpp"
#include "lowprev/sampling.hpp"

namespace lowprev {

namespace {

DirichletParams sampling_at(double concentration, std::span<const double> t) {
  for (double v : t) {
    if (!(v > 0.0)) throw_domain_error("cannot sample from p_t with a zero coordinate; use positive lower bounds");
  }
  return make_dirichlet(concentration, t);
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
  return d;
}

}  // namespace

IterationResult iterate_importance(const LowerPrevisionProblem& problem, std::span<const double> initial_t,
                                   const IterationSettings& settings, const OptimizerConfig& config) {
  if (settings.max_iter == 0) throw_domain_error("no iterations permitted");
  if (settings.sample_size < 2) throw_domain_error("iteration needs batches of at least 2 points");
  if (!(settings.ess_fraction > 0.0 && settings.ess_fraction <= 1.0)) {
    throw_domain_error("ess fraction must lie in (0, 1]");
  }
  if (!problem.feasible.contains(initial_t)) throw_domain_error("initial parameter lies outside the feasible set");

  IterationResult result;
  SimplexPoint t(initial_t.begin(), initial_t.end());
  const double threshold = settings.ess_fraction * static_cast<double>(settings.sample_size);

  for (std::size_t i = 0; i < settings.max_iter; ++i) {
    const auto started = std::chrono::steady_clock::now();
    IterationRecord record;
    record.t_in = t;
    try {
      const std::uint64_t seed =
          derive_seed(settings.master_seed, 0, Stream::iteration(settings.fresh_seeds ? static_cast<std::uint32_t>(i) : 0U));
      const SampleBatch batch = sample_dirichlet(sampling_at(problem.concentration, t), settings.sample_size, seed);
      const EnvelopeResult env = envelope_argmin(batch, problem.gamble, problem.concentration, problem.feasible, config);
      record.tau_out = env.tau;
      record.ess = env.ess_at_tau;
      record.value = env.value;
      record.optimizer_evals = env.optimizer_evals;
    } catch (const Error& e) {
      throw IterationError(e.kind(), "iteration " + std::to_string(i + 1) + ": " + e.what(), result.trace);
    }
    record.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    t = record.tau_out;
    const bool saturated = record.ess >= threshold;
    result.trace.records.push_back(std::move(record));
    if (saturated) {
      result.trace.terminated_by = Termination::ess_saturation;
      break;
    }
    result.trace.terminated_by = Termination::max_iterations;
  }
  result.final_t = t;
  return result;
}

StabilityReport stability_check(const LowerPrevisionProblem& problem, std::span<const double> t,
                                const StabilitySettings& settings, const OptimizerConfig& config) {
  if (settings.replications == 0) throw_domain_error("stability check needs at least one replication");
  if (settings.sample_size < 2) throw_domain_error("stability check needs batches of at least 2 points");
  if (!problem.feasible.contains(t)) throw_domain_error("stability check: parameter lies outside the feasible set");

  const DirichletParams q = sampling_at(problem.concentration, t);
  std::vector<double> deviation(settings.replications);
  std::vector<double> ess(settings.replications);
  parallel_for(settings.replications, settings.threads, [&](std::size_t r) {
    const SampleBatch batch =
        sample_dirichlet(q, settings.sample_size, derive_seed(settings.master_seed, r, Stream::stability()));
    const EnvelopeResult env = envelope_argmin(batch, problem.gamble, problem.concentration, problem.feasible, config);
    deviation[r] = sup_distance(env.tau, t);
    ess[r] = env.ess_at_tau;
  });

  StabilityReport report;
  report.max_tau_deviation = *std::max_element(deviation.begin(), deviation.end());
  report.min_ess = *std::min_element(ess.begin(), ess.end());
  report.stable = report.min_ess >= settings.ess_fraction * static_cast<double>(settings.sample_size) &&
                  report.max_tau_deviation <= settings.tau_tolerance;
  return report;
}

PipelineResult run_full_pipeline(const LowerPrevisionProblem& problem, const PipelineSettings& settings,
                                 const OptimizerConfig& config) {
  PipelineResult out;
  try {
    IterationResult it = iterate_importance(problem, settings.initial_t, settings.iteration, config);
    out.final_t = std::move(it.final_t);
    out.trace = std::move(it.trace);
  } catch (const IterationError& e) {
    throw IterationError(e.kind(), std::string("iterate: ") + e.what(), e.trace());
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("iterate: ") + e.what());
  }

  if (settings.fast_mode) {
    try {
      out.stability = stability_check(problem, out.final_t, settings.stability, config);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string("stability: ") + e.what());
    }
    if (out.stability->stable) {
      try {
        out.interval = direct_mean_ci(problem, out.final_t, settings.plan.replications * settings.plan.sample_size,
                                      settings.plan.level, settings.plan.master_seed);
      } catch (const Error& e) {
        throw Error(e.kind(), std::string("direct interval: ") + e.what());
      }
      return out;
    }
    out.fell_back = true;
  }

  try {
    const DirichletParams q = sampling_at(problem.concentration, out.final_t);
    out.interval = confidence_interval_exact(problem, q, settings.plan, config);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("exact interval: ") + e.what());
  }
  return out;
}

}  // namespace lowprev
