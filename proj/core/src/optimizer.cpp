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

#include "lowprev/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lowprev/error.hpp"

namespace lowprev {

void OptimizerConfig::validate() const {
  if (!(xtol > 0.0) || !(ftol > 0.0)) throw_domain_error("optimizer tolerances must be positive");
  if (start == StartKind::warm && warm_start.empty()) throw_domain_error("warm start requested without a point");
}

OptimizerConfig OptimizerConfig::resolved(std::size_t dimension) const {
  OptimizerConfig out = *this;
  if (out.max_evals == 0) out.max_evals = 500 * dimension;
  if (out.restarts == 0) out.restarts = dimension;
  return out;
}

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;
constexpr double kInitialStep = 1.0;

class Simplex {
 public:
  Simplex(const Objective& objective, std::size_t max_evals) : objective_(objective), max_evals_(max_evals) {}

  double evaluate(std::span<const double> x) {
    ++evaluations_;
    const double v = objective_(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }

  [[nodiscard]] bool exhausted() const { return evaluations_ >= max_evals_; }
  [[nodiscard]] std::size_t evaluations() const { return evaluations_; }

 private:
  const Objective& objective_;
  std::size_t max_evals_;
  std::size_t evaluations_ = 0;
};

}  // namespace

MinimizeResult minimize_downhill_simplex(const Objective& objective, std::span<const double> start,
                                         const OptimizerConfig& config) {
  config.validate();
  const std::size_t d = start.size();
  if (d == 0) throw_domain_error("downhill simplex needs at least one dimension");
  const std::size_t budget = config.max_evals == 0 ? 500 * (d + 1) : config.max_evals;

  Simplex counter(objective, budget);
  std::vector<std::vector<double>> x(d + 1, std::vector<double>(start.begin(), start.end()));
  std::vector<double> f(d + 1, std::numeric_limits<double>::infinity());

  const double f_start = objective(start);
  if (!std::isfinite(f_start)) throw_domain_error("objective is not finite at the start point");
  f[0] = f_start;

  MinimizeResult result;
  auto finish = [&](bool converged) {
    const auto best = static_cast<std::size_t>(std::distance(f.begin(), std::min_element(f.begin(), f.end())));
    result.point = x[best];
    result.value = f[best];
    result.evaluations = counter.evaluations() + 1;
    result.converged = converged;
    return result;
  };

  if (budget <= 1) return finish(false);
  for (std::size_t i = 1; i <= d; ++i) {
    if (counter.evaluations() + 1 >= budget) {
      // Unevaluated vertices keep f = inf and are never reported.
      return finish(false);
    }
    x[i][i - 1] += kInitialStep;
    f[i] = counter.evaluate(x[i]);
  }

  std::vector<std::size_t> order(d + 1);
  std::vector<double> centroid(d);
  std::vector<double> trial(d);
  std::vector<double> trial2(d);

  for (;;) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[d - 1];

    const double f_lo = f[best];
    const double f_hi = f[worst];
    const bool f_flat = std::isfinite(f_hi) &&
                        2.0 * std::fabs(f_hi - f_lo) <= config.ftol * (std::fabs(f_hi) + std::fabs(f_lo)) + 1e-300;
    double x_spread = 0.0;
    for (std::size_t i = 0; i <= d; ++i) {
      for (std::size_t j = 0; j < d; ++j) x_spread = std::max(x_spread, std::fabs(x[i][j] - x[best][j]));
    }
    if (f_flat && x_spread <= config.xtol) return finish(true);
    if (counter.evaluations() + 1 >= budget) return finish(false);

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < d; ++j) centroid[j] += x[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(d);

    for (std::size_t j = 0; j < d; ++j) trial[j] = centroid[j] + kReflect * (centroid[j] - x[worst][j]);
    const double f_reflect = counter.evaluate(trial);

    if (f_reflect < f[best]) {
      for (std::size_t j = 0; j < d; ++j) trial2[j] = centroid[j] + kExpand * (trial[j] - centroid[j]);
      const double f_expand = counter.evaluate(trial2);
      if (f_expand < f_reflect) {
        x[worst] = trial2;
        f[worst] = f_expand;
      } else {
        x[worst] = trial;
        f[worst] = f_reflect;
      }
      continue;
    }
    if (f_reflect < f[second_worst]) {
      x[worst] = trial;
      f[worst] = f_reflect;
      continue;
    }

    bool accepted = false;
    if (f_reflect < f[worst]) {
      for (std::size_t j = 0; j < d; ++j) trial2[j] = centroid[j] + kContract * (trial[j] - centroid[j]);
      const double f_contract = counter.evaluate(trial2);
      if (f_contract <= f_reflect) {
        x[worst] = trial2;
        f[worst] = f_contract;
        accepted = true;
      }
    } else {
      for (std::size_t j = 0; j < d; ++j) trial2[j] = centroid[j] + kContract * (x[worst][j] - centroid[j]);
      const double f_contract = counter.evaluate(trial2);
      if (f_contract < f[worst]) {
        x[worst] = trial2;
        f[worst] = f_contract;
        accepted = true;
      }
    }
    if (accepted) continue;

    for (std::size_t i = 0; i <= d; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < d; ++j) x[i][j] = x[best][j] + kShrink * (x[i][j] - x[best][j]);
      f[i] = counter.evaluate(x[i]);
    }
  }
}

}  // namespace lowprev
