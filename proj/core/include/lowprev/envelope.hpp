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

#ifndef LOWPREV_ENVELOPE_HPP
#define LOWPREV_ENVELOPE_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "lowprev/estimator.hpp"
#include "lowprev/model.hpp"
#include "lowprev/optimizer.hpp"
#include "lowprev/sampling.hpp"

/**
 * \file
 * \brief Lower envelope of self-normalised importance sampling estimates over the
 * constrained simplex, and the lower / upper estimator pair built from it.
 *
 * For a batch x the lower estimate is min_t theta(x, t), attained at the minimiser
 * tau(x). Evaluating the same batch at the minimiser of an independent batch x',
 * theta(x, tau(x')), gives the upper estimate; pathwise lower(x) <= upper(x, x').
 */

namespace lowprev {

/// Components within this distance of their lower bound are reported on the bound.
inline constexpr double kBoundarySnap = 1e-6;

/// Maps R^{k-1} onto the interior of the set: t = lb + slack * softmax(u_1, ..., u_{k-1}, 0).
SimplexPoint simplex_reparam(std::span<const double> logits, const ConstrainedSimplex& feasible);

/// Inverse of simplex_reparam for interior points; a point on the boundary is a domain error.
std::vector<double> inverse_reparam(std::span<const double> t, const ConstrainedSimplex& feasible);

/// Puts components within kBoundarySnap of lb_j on lb_j and gives the remainder to the largest free coordinate.
SimplexPoint snap_to_boundary(std::span<const double> t, const ConstrainedSimplex& feasible);

/// Self-normalised estimate of the batch at target Dirichlet(s t). Every estimate in this module goes through here.
EstimateReport estimate_at(const SampleBatch& batch, std::span<const double> values, double concentration,
                           std::span<const double> t);

struct EnvelopeResult {
  SimplexPoint tau;
  /// estimate_at(batch, values, s, tau).estimate, bit for bit.
  double value = 0.0;
  double ess_at_tau = 0.0;
  std::size_t optimizer_evals = 0;
  bool converged = false;
};

/// Minimises the self-normalised estimate over the constrained simplex.
/**
 * Runs the downhill simplex in softmax coordinates from `restarts` distinct starts
 * (the configured start first, then the barycenter and corner-biased starts), and
 * also probes the k extreme points of the set directly since minimisers of these
 * problems usually sit on the boundary. The best candidate wins; ties go to the
 * lexicographically smallest tau. Deterministic for identical inputs.
 */
EnvelopeResult envelope_argmin(const SampleBatch& batch, std::span<const double> values, double concentration,
                               const ConstrainedSimplex& feasible, const OptimizerConfig& config);

EnvelopeResult envelope_argmin(const SampleBatch& batch, const Gamble& gamble, double concentration,
                               const ConstrainedSimplex& feasible, const OptimizerConfig& config);

/// min_t theta(x, t); equal to envelope_argmin(...).value.
double lower_estimate(const SampleBatch& batch, const Gamble& gamble, double concentration,
                      const ConstrainedSimplex& feasible, const OptimizerConfig& config);

/// theta(x, tau_external). `tau_external` should come from an independent batch.
double upper_estimate(const SampleBatch& batch, std::span<const double> tau_external, std::span<const double> values,
                      double concentration, const ConstrainedSimplex& feasible);

double upper_estimate(const SampleBatch& batch, std::span<const double> tau_external, const Gamble& gamble,
                      double concentration, const ConstrainedSimplex& feasible);

}  // namespace lowprev

#endif  // LOWPREV_ENVELOPE_HPP
