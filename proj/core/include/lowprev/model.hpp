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

#ifndef LOWPREV_MODEL_HPP
#define LOWPREV_MODEL_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

/**
 * \file
 * \brief The imprecise Dirichlet model: constrained parameter simplex, Dirichlet
 * densities, gambles and the closed-form reference values used as oracles.
 */

namespace lowprev {

/// Absolute tolerance for simplex membership (sum to one, lower bounds).
inline constexpr double kSimplexTolerance = 1e-12;

/// A point of the unit simplex, stored densely.
using SimplexPoint = std::vector<double>;

/// Validates that `x` lies on the unit simplex within kSimplexTolerance.
/**
 * Components in [-tol, 0) are set to zero and the result is renormalised; anything
 * further off is rejected with a domain error rather than silently repaired.
 */
SimplexPoint checked_simplex_point(std::span<const double> x);

/// The parameter set {t in simplex : t_j >= lb_j}.
class ConstrainedSimplex {
 public:
  explicit ConstrainedSimplex(std::vector<double> lower_bounds);

  /// Same lower bound on every coordinate.
  static ConstrainedSimplex uniform(std::size_t dimension, double bound);

  [[nodiscard]] std::size_t dimension() const noexcept { return lower_bounds_.size(); }
  [[nodiscard]] std::span<const double> lower_bounds() const noexcept { return lower_bounds_; }

  /// Mass left after every coordinate receives its lower bound, 1 - sum(lb).
  [[nodiscard]] double slack() const noexcept { return slack_; }

  /// True when sum(lb) = 1, so the set is a single point.
  [[nodiscard]] bool is_singleton() const noexcept { return slack_ <= kSimplexTolerance; }

  [[nodiscard]] bool contains(std::span<const double> t) const;

  /// lb + slack / k on every coordinate.
  [[nodiscard]] SimplexPoint barycenter() const;

  /// lb + slack * e_j, the extreme point where coordinate j takes all the slack.
  [[nodiscard]] SimplexPoint vertex(std::size_t j) const;

 private:
  std::vector<double> lower_bounds_;
  double slack_;
};

/// Dirichlet(s * t): concentration s and mean t.
struct DirichletParams {
  double concentration;
  SimplexPoint mean;
};

/// Builds validated parameters: s > 0 and t on the simplex with every t_j > 0.
DirichletParams make_dirichlet(double concentration, std::span<const double> mean);

/// A bounded real-valued function on the simplex.
class Gamble {
 public:
  enum class Kind { linear, entropy, custom };
  using Evaluator = std::function<double(std::span<const double>)>;

  static Gamble linear(std::vector<double> coefficients);
  static Gamble entropy();
  /// `evaluator` must be a pure function of the point.
  static Gamble custom(std::string name, Evaluator evaluator);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] std::span<const double> coefficients() const noexcept { return coefficients_; }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }

  double operator()(std::span<const double> x) const;

 private:
  Gamble(Kind kind, std::string name, std::vector<double> coefficients, Evaluator evaluator);

  Kind kind_;
  std::string name_;
  std::vector<double> coefficients_;
  Evaluator evaluator_;
};

double eval_linear_gamble(std::span<const double> coefficients, std::span<const double> x);

/// -sum x_j ln x_j with 0 ln 0 = 0.
double eval_entropy_gamble(std::span<const double> x);

/// Mean of a linear gamble under any distribution with mean t (a Dirichlet mean is t).
double exact_expectation_linear(std::span<const double> coefficients, std::span<const double> t);

/// E[-sum x_j ln x_j] under Dirichlet(s t): sum_j t_j (psi(s + 1) - psi(s t_j + 1)).
double exact_expectation_entropy(double concentration, std::span<const double> t);

struct LowerLinearSolution {
  double value;
  SimplexPoint argmin;
};

/// Closed-form minimum of sum c_j t_j over the constrained simplex.
/**
 * Starts at t = lb and hands the slack to the smallest coefficient (the first one on
 * ties), which is optimal because the set has no upper bounds.
 */
LowerLinearSolution exact_lower_linear(std::span<const double> coefficients,
                                       const ConstrainedSimplex& feasible);

/// ln Gamma(s) - sum ln Gamma(s t_j) + sum (s t_j - 1) ln x_j.
/**
 * A zero coordinate is allowed only where its exponent is nonnegative; when the
 * exponent is negative the density is infinite and a domain error is raised.
 */
double dirichlet_logpdf(const DirichletParams& params, std::span<const double> x);

/// A lower prevision problem: the gamble, the parameter set and the fixed concentration s.
struct LowerPrevisionProblem {
  ConstrainedSimplex feasible;
  double concentration;
  Gamble gamble;
};

}  // namespace lowprev

#endif  // LOWPREV_MODEL_HPP
