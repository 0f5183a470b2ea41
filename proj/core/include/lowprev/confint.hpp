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

#ifndef LOWPREV_CONFINT_HPP
#define LOWPREV_CONFINT_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lowprev/model.hpp"
#include "lowprev/optimizer.hpp"
#include "lowprev/special.hpp"

/**
 * \file
 * \brief Confidence intervals for a lower prevision from N replicated lower / upper
 * estimates.
 *
 * Replication r draws its batches from derive_seed(master, r, primary) and
 * derive_seed(master, r, paired). With lower values Y_i and upper values Z_i the
 * interval is [mean(Y) - c sd(Y) / sqrt(N), mean(Z) + c sd(Z) / sqrt(N)] where c is
 * the two-sided Student-t critical value with N - 1 degrees of freedom.
 */

namespace lowprev {

enum class IntervalMethod {
  /// Upper values theta(x_i, tau(x'_i)); 2N optimiser runs, never empty.
  exact,
  /// Upper values theta(x'_i, tau(x_i)) reuse the lower minimisers; N runs, may be empty.
  fast,
  /// Plain Student-t interval on direct draws from p_t.
  direct,
};

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
  IntervalMethod method = IntervalMethod::exact;
  std::size_t replications = 0;
  std::size_t sample_size = 0;
  double mean_lower = 0.0;
  double mean_upper = 0.0;
  double sd_lower = 0.0;
  double sd_upper = 0.0;
  /// Average minimiser over the lower replications.
  SimplexPoint mean_tau;
  /// Average effective sample size at those minimisers.
  double mean_ess = 0.0;
  /// Widening applied by confidence_interval_biased.
  double beta = 0.0;
  /// Fast method only: lo > hi was observed. The bounds are reported unchanged.
  bool empty = false;
};

struct ReplicationPlan {
  std::uint64_t master_seed = 0;
  std::size_t replications = 0;
  std::size_t sample_size = 0;
  double level = 0.95;
  unsigned threads = 1;
};

/// Per-replication outputs in replication order.
struct ReplicationValues {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<SimplexPoint> taus;
  std::vector<double> ess;
};

/// Assembles the interval and its diagnostics from replication values. Needs N >= 2.
ConfidenceInterval interval_from_replications(const ReplicationValues& values, double level, std::size_t sample_size,
                                              IntervalMethod method);

ConfidenceInterval confidence_interval_exact(const LowerPrevisionProblem& problem, const DirichletParams& sampling,
                                             const ReplicationPlan& plan, const OptimizerConfig& config);

ConfidenceInterval confidence_interval_fast(const LowerPrevisionProblem& problem, const DirichletParams& sampling,
                                            const ReplicationPlan& plan, const OptimizerConfig& config);

/// Widens both ends by a uniform bias bound beta >= 0.
ConfidenceInterval confidence_interval_biased(const ConfidenceInterval& interval, double beta);

/// x_bar +- t_{m-1} s / sqrt(m) for the gamble on m = total_samples direct draws from Dirichlet(s t).
ConfidenceInterval direct_mean_ci(const LowerPrevisionProblem& problem, std::span<const double> t,
                                  std::size_t total_samples, double level, std::uint64_t master_seed);

}  // namespace lowprev

#endif  // LOWPREV_CONFINT_HPP
