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

#ifndef LOWPREV_ESTIMATOR_HPP
#define LOWPREV_ESTIMATOR_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "lowprev/model.hpp"
#include "lowprev/sampling.hpp"

/**
 * \file
 * \brief Importance weights and the standard / self-normalised importance sampling
 * estimators with their standard error and effective sample size.
 *
 * All weight arithmetic happens on the log scale; weights are exponentiated only
 * after subtracting their maximum.
 */

namespace lowprev {

/// Unnormalised log importance weights ln w'_t(x_i) of a batch towards target Dirichlet(s t).
struct LogWeights {
  std::vector<double> values;
  double target_concentration = 0.0;
  SimplexPoint target;
  DirichletParams source;
};

enum class EstimatorKind { standard, self_normalised };

struct EstimateReport {
  double estimate = 0.0;
  /// Estimated standard deviation of one weighted draw; the standard error is sigma_hat / sqrt(n).
  double sigma_hat = 0.0;
  /// (sum w)^2 / sum w^2, clamped to [1, n].
  double ess = 0.0;
  std::size_t n = 0;
  EstimatorKind kind = EstimatorKind::self_normalised;
};

/// ln w'_t(x_i) = sum_j (s t_j - s~ t~_j) ln x_ij, without any normalising constants.
LogWeights log_unnormalised_weights(double concentration, std::span<const double> target,
                                    const SampleBatch& batch);

/// Same as above, writing into a caller-owned buffer of size batch.size().
void log_unnormalised_weights_into(double concentration, std::span<const double> target,
                                   const SampleBatch& batch, std::span<double> out);

/// True density ratios p_t(x_i) / q(x_i), normalising constants included.
std::vector<double> density_ratios(double concentration, std::span<const double> target,
                                   const SampleBatch& batch);

/// Self-normalised estimate sum u_i f_i / sum u_i with u_i = exp(logw_i - max logw).
/**
 * sigma_hat^2 = [1 / (n - 1)] * [(1/n) sum u_i^2 (f_i - estimate)^2] / [(1/n) sum u_i]^2.
 * Needs n >= 2. Throws a numerical error when the shifted weights sum to zero.
 */
EstimateReport self_normalised_estimate(std::span<const double> log_weights, std::span<const double> values);
EstimateReport self_normalised_estimate(const LogWeights& weights, std::span<const double> values);

/// Plain importance sampling estimate (1/n) sum w_i f_i on true density ratios. sigma_hat is NaN when n = 1.
EstimateReport standard_estimate(std::span<const double> weights, std::span<const double> values);

double effective_sample_size(std::span<const double> log_weights);
double effective_sample_size(const LogWeights& weights);

}  // namespace lowprev

#endif  // LOWPREV_ESTIMATOR_HPP
