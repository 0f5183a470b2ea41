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

#include "lowprev/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include <boost/math/special_functions/digamma.hpp>

#include "lowprev/error.hpp"
#include "lowprev/special.hpp"

namespace lowprev {

namespace {

void require_same_dimension(std::size_t lhs, std::size_t rhs, const char* what) {
  if (lhs != rhs) {
    throw_domain_error(std::string(what) + ": dimension mismatch (" + std::to_string(lhs) + " vs " +
                       std::to_string(rhs) + ")");
  }
}

}  // namespace

SimplexPoint checked_simplex_point(std::span<const double> x) {
  if (x.empty()) throw_domain_error("simplex point must have at least one coordinate");
  SimplexPoint out(x.begin(), x.end());
  for (double& v : out) {
    if (!std::isfinite(v) || v < -kSimplexTolerance) {
      throw_domain_error("simplex point has a negative or nonfinite coordinate");
    }
    v = std::max(v, 0.0);
  }
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  if (std::fabs(total - 1.0) > kSimplexTolerance) {
    throw_domain_error("simplex point does not sum to one (sum = " + std::to_string(total) + ")");
  }
  if (total != 1.0) {
    for (double& v : out) v /= total;
  }
  return out;
}

ConstrainedSimplex::ConstrainedSimplex(std::vector<double> lower_bounds)
    : lower_bounds_(std::move(lower_bounds)), slack_(0.0) {
  if (lower_bounds_.size() < 2) throw_domain_error("constrained simplex needs dimension >= 2");
  for (double lb : lower_bounds_) {
    if (!std::isfinite(lb) || lb < 0.0) throw_domain_error("lower bounds must be finite and >= 0");
  }
  const double total = std::accumulate(lower_bounds_.begin(), lower_bounds_.end(), 0.0);
  if (total > 1.0 + kSimplexTolerance) {
    throw_domain_error("infeasible parameter set: lower bounds sum to " + std::to_string(total));
  }
  slack_ = std::max(0.0, 1.0 - total);
}

ConstrainedSimplex ConstrainedSimplex::uniform(std::size_t dimension, double bound) {
  return ConstrainedSimplex(std::vector<double>(dimension, bound));
}

bool ConstrainedSimplex::contains(std::span<const double> t) const {
  if (t.size() != dimension()) return false;
  double total = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (!std::isfinite(t[j]) || t[j] < lower_bounds_[j] - kSimplexTolerance) return false;
    total += t[j];
  }
  return std::fabs(total - 1.0) <= kSimplexTolerance;
}

SimplexPoint ConstrainedSimplex::barycenter() const {
  SimplexPoint t(lower_bounds_);
  const double share = slack_ / static_cast<double>(dimension());
  for (double& v : t) v += share;
  return t;
}

SimplexPoint ConstrainedSimplex::vertex(std::size_t j) const {
  if (j >= dimension()) throw_domain_error("vertex index out of range");
  SimplexPoint t(lower_bounds_);
  t[j] += slack_;
  return t;
}

DirichletParams make_dirichlet(double concentration, std::span<const double> mean) {
  if (!(concentration > 0.0) || !std::isfinite(concentration)) {
    throw_domain_error("Dirichlet concentration must be positive and finite");
  }
  SimplexPoint t = checked_simplex_point(mean);
  if (t.size() < 2) throw_domain_error("Dirichlet needs dimension >= 2");
  for (double v : t) {
    if (!(v > 0.0)) throw_domain_error("Dirichlet mean must be strictly positive in every coordinate");
  }
  return DirichletParams{concentration, std::move(t)};
}

Gamble::Gamble(Kind kind, std::string name, std::vector<double> coefficients, Evaluator evaluator)
    : kind_(kind), name_(std::move(name)), coefficients_(std::move(coefficients)), evaluator_(std::move(evaluator)) {}

Gamble Gamble::linear(std::vector<double> coefficients) {
  if (coefficients.empty()) throw_domain_error("linear gamble needs at least one coefficient");
  for (double c : coefficients) {
    if (!std::isfinite(c)) throw_domain_error("linear gamble coefficients must be finite");
  }
  return Gamble(Kind::linear, "linear", std::move(coefficients), nullptr);
}

Gamble Gamble::entropy() { return Gamble(Kind::entropy, "entropy", {}, nullptr); }

Gamble Gamble::custom(std::string name, Evaluator evaluator) {
  if (!evaluator) throw_domain_error("custom gamble needs an evaluator");
  return Gamble(Kind::custom, std::move(name), {}, std::move(evaluator));
}

double Gamble::operator()(std::span<const double> x) const {
  switch (kind_) {
    case Kind::linear:
      return eval_linear_gamble(coefficients_, x);
    case Kind::entropy:
      return eval_entropy_gamble(x);
    case Kind::custom: {
      const double v = evaluator_(x);
      if (!std::isfinite(v)) throw_domain_error("gamble '" + name_ + "' returned a nonfinite value");
      return v;
    }
  }
  return 0.0;
}

double eval_linear_gamble(std::span<const double> coefficients, std::span<const double> x) {
  require_same_dimension(coefficients.size(), x.size(), "linear gamble");
  double sum = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) sum += coefficients[j] * x[j];
  return sum;
}

double eval_entropy_gamble(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) {
    if (v > 0.0) sum -= v * std::log(v);
  }
  return sum;
}

double exact_expectation_linear(std::span<const double> coefficients, std::span<const double> t) {
  return eval_linear_gamble(coefficients, t);
}

double exact_expectation_entropy(double concentration, std::span<const double> t) {
  if (!(concentration > 0.0)) throw_domain_error("concentration must be positive");
  const double psi_total = boost::math::digamma(concentration + 1.0);
  double sum = 0.0;
  for (double tj : t) {
    if (tj > 0.0) sum += tj * (psi_total - boost::math::digamma(concentration * tj + 1.0));
  }
  return sum;
}

LowerLinearSolution exact_lower_linear(std::span<const double> coefficients,
                                       const ConstrainedSimplex& feasible) {
  require_same_dimension(coefficients.size(), feasible.dimension(), "exact_lower_linear");
  const auto lb = feasible.lower_bounds();
  SimplexPoint argmin(lb.begin(), lb.end());
  const auto smallest = static_cast<std::size_t>(
      std::distance(coefficients.begin(), std::min_element(coefficients.begin(), coefficients.end())));
  argmin[smallest] += feasible.slack();
  return LowerLinearSolution{eval_linear_gamble(coefficients, argmin), std::move(argmin)};
}

double dirichlet_logpdf(const DirichletParams& params, std::span<const double> x) {
  const double s = params.concentration;
  if (!(s > 0.0)) throw_domain_error("Dirichlet concentration must be positive");
  require_same_dimension(params.mean.size(), x.size(), "dirichlet_logpdf");
  double value = log_gamma(s);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double alpha = s * params.mean[j];
    value -= log_gamma(alpha);
    const double exponent = alpha - 1.0;
    if (x[j] > 0.0) {
      value += exponent * std::log(x[j]);
    } else if (exponent < 0.0) {
      throw_domain_error("Dirichlet density is infinite on this boundary point");
    } else if (exponent > 0.0) {
      return -std::numeric_limits<double>::infinity();
    }
  }
  return value;
}

}  // namespace lowprev
