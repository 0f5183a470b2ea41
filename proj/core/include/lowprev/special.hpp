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

#ifndef LOWPREV_SPECIAL_HPP
#define LOWPREV_SPECIAL_HPP

#include <cstddef>

namespace lowprev {

/// ln Gamma(x) for x > 0. Reentrant (does not touch the global signgam).
double log_gamma(double x);

/// Regularised incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided Student-t critical value: the 1 - (1 - level) / 2 quantile with `df` degrees of freedom.
/**
 * Found by inverting the incomplete beta representation of the t tail,
 * P(|T| > c) = I_{df / (df + c^2)}(df / 2, 1 / 2), with bisection followed by a
 * Newton polish. Throws a domain error for df = 0 or level outside (0, 1).
 */
double t_critical(std::size_t df, double level);

}  // namespace lowprev

#endif  // LOWPREV_SPECIAL_HPP
