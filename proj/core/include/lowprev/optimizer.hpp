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

#ifndef LOWPREV_OPTIMIZER_HPP
#define LOWPREV_OPTIMIZER_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "lowprev/model.hpp"

namespace lowprev {

/// Where the first downhill simplex run starts.
enum class StartKind {
  /// Biased towards the extreme point where the last coordinate takes all the slack.
  lb_corner,
  barycenter,
  /// OptimizerConfig::warm_start.
  warm,
};

struct OptimizerConfig {
  /// Objective evaluation budget per run; 0 means 500 * k.
  std::size_t max_evals = 0;
  double xtol = 1e-8;
  /// Relative tolerance on the spread of objective values across the simplex.
  double ftol = 1e-9;
  /// Number of distinct starts; 0 means k.
  std::size_t restarts = 0;
  StartKind start = StartKind::barycenter;
  SimplexPoint warm_start;

  /// Throws a domain error for nonpositive tolerances or a missing warm start.
  void validate() const;
  /// Copy with the dimension-dependent defaults filled in.
  [[nodiscard]] OptimizerConfig resolved(std::size_t dimension) const;
};

struct MinimizeResult {
  std::vector<double> point;
  double value = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Nelder-Mead downhill simplex on R^d.
/**
 * Reflection 1, expansion 2, contraction 1/2, shrink 1/2; the initial simplex puts
 * a unit step on each axis. Stops once the objective spread across the simplex is
 * below ftol (relative) and every vertex is within xtol (sup norm) of the best one,
 * or when max_evals evaluations have been spent. Nonfinite values away from the start
 * are treated as +inf; a nonfinite value at the start is a domain error.
 */
MinimizeResult minimize_downhill_simplex(const Objective& objective, std::span<const double> start,
                                         const OptimizerConfig& config);

}  // namespace lowprev

#endif  // LOWPREV_OPTIMIZER_HPP
