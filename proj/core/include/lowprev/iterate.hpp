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

#ifndef LOWPREV_ITERATE_HPP
#define LOWPREV_ITERATE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lowprev/confint.hpp"
#include "lowprev/error.hpp"
#include "lowprev/model.hpp"
#include "lowprev/optimizer.hpp"

/**
 * \file
 * \brief Iterative importance sampling: sample from p_t, move t to the envelope
 * minimiser, repeat until the effective sample size at the minimiser saturates.
 */

namespace lowprev {

struct IterationRecord {
  SimplexPoint t_in;
  SimplexPoint tau_out;
  double ess = 0.0;
  double value = 0.0;
  /// Seconds. Not reproducible; kept out of golden comparisons.
  double wall_time = 0.0;
  std::size_t optimizer_evals = 0;
};

enum class Termination { ess_saturation, max_iterations };

struct IterationTrace {
  std::vector<IterationRecord> records;
  Termination terminated_by = Termination::max_iterations;
};

struct IterationSettings {
  std::size_t sample_size = 0;
  double ess_fraction = 0.95;
  std::size_t max_iter = 10;
  std::uint64_t master_seed = 0;
  /// Draw every pass from a new iteration stream instead of reusing the first one.
  bool fresh_seeds = false;
};

struct IterationResult {
  SimplexPoint final_t;
  IterationTrace trace;
};

/// Raised when an iteration fails; carries the records completed before the failure.
class IterationError : public Error {
 public:
  IterationError(ErrorKind kind, const std::string& what, IterationTrace trace)
      : Error(kind, what), trace_(std::move(trace)) {}

  [[nodiscard]] const IterationTrace& trace() const noexcept { return trace_; }

 private:
  IterationTrace trace_;
};

/// Samples each pass from Dirichlet(s t) with the problem's concentration. Every t_j must be positive.
IterationResult iterate_importance(const LowerPrevisionProblem& problem, std::span<const double> initial_t,
                                   const IterationSettings& settings, const OptimizerConfig& config);

struct StabilitySettings {
  std::size_t replications = 8;
  std::size_t sample_size = 0;
  double tau_tolerance = 0.02;
  double ess_fraction = 0.95;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;
};

struct StabilityReport {
  bool stable = false;
  double max_tau_deviation = 0.0;
  double min_ess = 0.0;
};

/// Fresh envelope runs on batches from p_t. Stable when every run keeps its ESS and stays near t.
StabilityReport stability_check(const LowerPrevisionProblem& problem, std::span<const double> t,
                                const StabilitySettings& settings, const OptimizerConfig& config);

struct PipelineSettings {
  SimplexPoint initial_t;
  IterationSettings iteration;
  StabilitySettings stability;
  /// Replications and batch size for the exact interval; N * n draws for the direct one.
  ReplicationPlan plan;
  bool fast_mode = false;
};

struct PipelineResult {
  SimplexPoint final_t;
  IterationTrace trace;
  std::optional<StabilityReport> stability;
  ConfidenceInterval interval;
  /// Fast mode was requested but the stability check failed, so the exact interval was used.
  bool fell_back = false;
};

/// iterate_importance, then either direct_mean_ci (fast mode, stable) or the exact interval with q = p_{final_t}.
/**
 * Errors are rethrown with the failing stage as a prefix.
 */
PipelineResult run_full_pipeline(const LowerPrevisionProblem& problem, const PipelineSettings& settings,
                                 const OptimizerConfig& config);

}  // namespace lowprev

#endif  // LOWPREV_ITERATE_HPP
