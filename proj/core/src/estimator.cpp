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

#include "lowprev/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lowprev/error.hpp"
#include "lowprev/special.hpp"

namespace lowprev {

namespace {

void require_lengths(std::size_t weights, std::size_t values) {
  if (weights != values) {
    throw_domain_error("weights and gamble values differ in length (" + std::to_string(weights) + " vs " +
                       std::to_string(values) + ")");
  }
}

double clamp_ess(double ess, std::size_t n) { return std::clamp(ess, 1.0, static_cast<double>(n)); }

// ln Gamma(s) - sum ln Gamma(s t_j): the log normaliser of Dirichlet(s t).
double log_normaliser(double concentration, std::span<const double> mean) {
  double value = log_gamma(concentration);
  for (double tj : mean) value -= log_gamma(concentration * tj);
  return value;
}

}  // namespace

void log_unnormalised_weights_into(double concentration, std::span<const double> target,
                                   const SampleBatch& batch, std::span<double> out) {
  const std::size_t k = batch.dimension();
  if (target.size() != k) throw_domain_error("target parameter dimension differs from the batch");
  if (out.size() != batch.size()) throw_domain_error("log weight buffer has the wrong length");
  const DirichletParams& source = batch.source();

  double exponents[64];
  std::vector<double> heap;
  double* e = exponents;
  if (k > 64) {
    heap.resize(k);
    e = heap.data();
  }
  for (std::size_t j = 0; j < k; ++j) e[j] = concentration * target[j] - source.concentration * source.mean[j];

  const auto logs = batch.log_points();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double* row = logs.data() + i * k;
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += e[j] * row[j];
    if (!std::isfinite(sum)) {
      throw_domain_error("log weight of sample " + std::to_string(i) + " is not finite (coordinate at 0)");
    }
    out[i] = sum;
  }
}

LogWeights log_unnormalised_weights(double concentration, std::span<const double> target,
                                    const SampleBatch& batch) {
  LogWeights weights;
  weights.values.resize(batch.size());
  log_unnormalised_weights_into(concentration, target, batch, weights.values);
  weights.target_concentration = concentration;
  weights.target.assign(target.begin(), target.end());
  weights.source = batch.source();
  return weights;
}

std::vector<double> density_ratios(double concentration, std::span<const double> target,
                                   const SampleBatch& batch) {
  std::vector<double> ratios(batch.size());
  log_unnormalised_weights_into(concentration, target, batch, ratios);
  const DirichletParams& source = batch.source();
  const double shift = log_normaliser(concentration, target) - log_normaliser(source.concentration, source.mean);
  for (double& r : ratios) r = std::exp(r + shift);
  return ratios;
}

EstimateReport self_normalised_estimate(std::span<const double> log_weights, std::span<const double> values) {
  require_lengths(log_weights.size(), values.size());
  const std::size_t n = log_weights.size();
  if (n < 2) throw_domain_error("self-normalised estimate needs at least two samples");

  double top = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) {
    if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity()) {
      throw_domain_error("log weights must not be NaN or +inf");
    }
    top = std::max(top, lw);
  }
  if (!std::isfinite(top)) throw_numerical_error("degenerate weights");

  double sum_u = 0.0;
  double sum_u2 = 0.0;
  double sum_uf = 0.0;
  double fmin = values[0];
  double fmax = values[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double u = std::exp(log_weights[i] - top);
    sum_u += u;
    sum_u2 += u * u;
    sum_uf += u * values[i];
    fmin = std::min(fmin, values[i]);
    fmax = std::max(fmax, values[i]);
  }
  if (!(sum_u > 0.0)) throw_numerical_error("degenerate weights");

  // A convex combination of the values; clamp away rounding outside their range.
  const double estimate = std::clamp(sum_uf / sum_u, fmin, fmax);

  double spread = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = std::exp(log_weights[i] - top);
    const double d = values[i] - estimate;
    spread += u * u * d * d;
  }
  const double dn = static_cast<double>(n);
  const double mean_u = sum_u / dn;
  const double variance = (spread / dn) / (mean_u * mean_u) / (dn - 1.0);

  EstimateReport report;
  report.estimate = estimate;
  report.sigma_hat = std::sqrt(variance);
  report.ess = clamp_ess(sum_u * sum_u / sum_u2, n);
  report.n = n;
  report.kind = EstimatorKind::self_normalised;
  return report;
}

EstimateReport self_normalised_estimate(const LogWeights& weights, std::span<const double> values) {
  return self_normalised_estimate(weights.values, values);
}

EstimateReport standard_estimate(std::span<const double> weights, std::span<const double> values) {
  require_lengths(weights.size(), values.size());
  const std::size_t n = weights.size();
  if (n == 0) throw_domain_error("standard estimate of an empty batch");

  double sum_w = 0.0;
  double sum_w2 = 0.0;
  double sum_wf = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights[i];
    if (!std::isfinite(w) || w < 0.0) {
      throw_numerical_error("importance weight " + std::to_string(i) + " is negative or not finite");
    }
    sum_w += w;
    sum_w2 += w * w;
    sum_wf += w * values[i];
  }
  if (!(sum_w2 > 0.0)) throw_numerical_error("degenerate weights");

  const double dn = static_cast<double>(n);
  const double estimate = sum_wf / dn;
  double spread = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = weights[i] * values[i] - estimate;
    spread += d * d;
  }

  EstimateReport report;
  report.estimate = estimate;
  report.sigma_hat = n > 1 ? std::sqrt(spread / (dn - 1.0)) : std::numeric_limits<double>::quiet_NaN();
  report.ess = clamp_ess(sum_w * sum_w / sum_w2, n);
  report.n = n;
  report.kind = EstimatorKind::standard;
  return report;
}

double effective_sample_size(std::span<const double> log_weights) {
  const std::size_t n = log_weights.size();
  if (n == 0) throw_domain_error("effective sample size of an empty batch");
  double top = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) {
    if (std::isnan(lw)) throw_domain_error("log weights must not be NaN");
    top = std::max(top, lw);
  }
  if (!std::isfinite(top)) throw_numerical_error("degenerate weights");
  double sum_u = 0.0;
  double sum_u2 = 0.0;
  for (double lw : log_weights) {
    const double u = std::exp(lw - top);
    sum_u += u;
    sum_u2 += u * u;
  }
  return clamp_ess(sum_u * sum_u / sum_u2, n);
}

double effective_sample_size(const LogWeights& weights) { return effective_sample_size(weights.values); }

}  // namespace lowprev
