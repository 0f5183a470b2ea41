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

#include "lowprev/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include <boost/math/tools/minima.hpp>

#include "lowprev/error.hpp"

namespace lowprev {

namespace {

// Logits are clamped to this box inside the objective. exp(-2 * 30) of the slack is far
// below kBoundarySnap, and the flat region outside the box lets the simplex collapse.
constexpr double kLogitBound = 30.0;
// Magnitude of the logit offset used for corner-biased starts.
constexpr double kCornerLogit = 3.0;
// Polish: sweeps over coordinate pairs, each a bounded Brent search.
constexpr int kPolishSweeps = 10;
constexpr int kPolishBits = 30;
constexpr std::uintmax_t kPolishIterations = 60;

void softmax_into(std::span<const double> logits, const ConstrainedSimplex& feasible, std::span<double> out) {
  const std::size_t k = feasible.dimension();
  const auto lb = feasible.lower_bounds();
  double top = 0.0;  // the pinned last logit
  for (double u : logits) top = std::max(top, u);
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < k; ++j) {
    out[j] = std::exp(logits[j] - top);
    total += out[j];
  }
  out[k - 1] = std::exp(-top);
  total += out[k - 1];
  for (std::size_t j = 0; j < k; ++j) out[j] = lb[j] + feasible.slack() * (out[j] / total);
}

bool lexicographically_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

struct Candidate {
  SimplexPoint tau;
  EstimateReport report;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.report.estimate != b.report.estimate) return a.report.estimate < b.report.estimate;
  return lexicographically_less(a.tau, b.tau);
}

std::vector<std::vector<double>> start_points(const ConstrainedSimplex& feasible, const OptimizerConfig& config) {
  const std::size_t k = feasible.dimension();
  const std::size_t d = k - 1;
  std::vector<std::vector<double>> pool;
  pool.emplace_back(d, 0.0);  // barycenter
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> u(d, 0.0);
    if (j < d) {
      u[j] = kCornerLogit;
    } else {
      std::fill(u.begin(), u.end(), -kCornerLogit);
    }
    pool.push_back(std::move(u));
  }

  std::vector<double> first;
  switch (config.start) {
    case StartKind::barycenter:
      first = pool[0];
      break;
    case StartKind::lb_corner:
      first = pool[k];
      break;
    case StartKind::warm: {
      if (config.warm_start.size() != k) throw_domain_error("warm start has the wrong dimension");
      // Pull the warm point slightly inside so it has finite logits.
      const SimplexPoint centre = feasible.barycenter();
      SimplexPoint inner(k);
      for (std::size_t j = 0; j < k; ++j) inner[j] = 0.999 * config.warm_start[j] + 0.001 * centre[j];
      first = inverse_reparam(inner, feasible);
      for (double& u : first) u = std::clamp(u, -kLogitBound, kLogitBound);
      break;
    }
  }

  std::vector<std::vector<double>> starts{first};
  for (const auto& candidate : pool) {
    if (starts.size() >= config.restarts) break;
    if (candidate == first) continue;
    starts.push_back(candidate);
  }
  return starts;
}

}  // namespace

SimplexPoint simplex_reparam(std::span<const double> logits, const ConstrainedSimplex& feasible) {
  const std::size_t k = feasible.dimension();
  if (logits.size() + 1 != k) throw_domain_error("reparameterisation expects k - 1 logits");
  SimplexPoint t(k);
  softmax_into(logits, feasible, t);
  return t;
}

std::vector<double> inverse_reparam(std::span<const double> t, const ConstrainedSimplex& feasible) {
  const std::size_t k = feasible.dimension();
  if (t.size() != k) throw_domain_error("inverse reparameterisation: dimension mismatch");
  if (feasible.is_singleton()) throw_domain_error("inverse reparameterisation of a singleton set");
  const auto lb = feasible.lower_bounds();
  std::vector<double> log_share(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double share = (t[j] - lb[j]) / feasible.slack();
    if (!(share > 0.0)) throw_domain_error("inverse reparameterisation of a boundary point");
    log_share[j] = std::log(share);
  }
  std::vector<double> logits(k - 1);
  for (std::size_t j = 0; j + 1 < k; ++j) logits[j] = log_share[j] - log_share[k - 1];
  return logits;
}

SimplexPoint snap_to_boundary(std::span<const double> t, const ConstrainedSimplex& feasible) {
  const std::size_t k = feasible.dimension();
  const auto lb = feasible.lower_bounds();
  SimplexPoint out(t.begin(), t.end());
  std::size_t largest = 0;
  for (std::size_t j = 1; j < k; ++j) {
    if (out[j] - lb[j] > out[largest] - lb[largest]) largest = j;
  }
  double others = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (j == largest) continue;
    if (out[j] - lb[j] <= kBoundarySnap) out[j] = lb[j];
    others += out[j];
  }
  out[largest] = 1.0 - others;
  return out;
}

EstimateReport estimate_at(const SampleBatch& batch, std::span<const double> values, double concentration,
                           std::span<const double> t) {
  std::vector<double> log_weights(batch.size());
  log_unnormalised_weights_into(concentration, t, batch, log_weights);
  return self_normalised_estimate(log_weights, values);
}

EnvelopeResult envelope_argmin(const SampleBatch& batch, std::span<const double> values, double concentration,
                               const ConstrainedSimplex& feasible, const OptimizerConfig& config) {
  const std::size_t k = feasible.dimension();
  if (batch.dimension() != k) throw_domain_error("batch and parameter set differ in dimension");
  if (values.size() != batch.size()) throw_domain_error("gamble values and batch differ in length");
  if (!(concentration > 0.0)) throw_domain_error("concentration must be positive");
  const OptimizerConfig cfg = config.resolved(k);
  cfg.validate();

  EnvelopeResult result;
  std::optional<Candidate> best;
  bool all_converged = true;

  auto consider = [&](SimplexPoint tau) {
    ++result.optimizer_evals;
    try {
      Candidate c{tau, estimate_at(batch, values, concentration, tau)};
      if (!best || better(c, *best)) best = std::move(c);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::numerical) throw;
    }
  };

  if (feasible.is_singleton()) {
    const auto lb = feasible.lower_bounds();
    consider(checked_simplex_point(lb));
  } else {
    SimplexPoint probe(k);
    std::vector<double> log_weights(batch.size());
    std::vector<double> clamped(k - 1);
    const Objective objective = [&](std::span<const double> u) {
      for (std::size_t j = 0; j + 1 < k; ++j) clamped[j] = std::clamp(u[j], -kLogitBound, kLogitBound);
      softmax_into(clamped, feasible, probe);
      try {
        log_unnormalised_weights_into(concentration, probe, batch, log_weights);
        return self_normalised_estimate(log_weights, values).estimate;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::numerical) throw;
        return std::numeric_limits<double>::infinity();
      }
    };

    for (const auto& start : start_points(feasible, cfg)) {
      MinimizeResult run;
      try {
        run = minimize_downhill_simplex(objective, start, cfg);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::domain) throw;
        all_converged = false;  // objective not finite at this start
        continue;
      }
      result.optimizer_evals += run.evaluations;
      all_converged = all_converged && run.converged;
      for (double& u : run.point) u = std::clamp(u, -kLogitBound, kLogitBound);
      consider(snap_to_boundary(simplex_reparam(run.point, feasible), feasible));
    }
    for (std::size_t j = 0; j < k; ++j) consider(feasible.vertex(j));

    // Softmax coordinates reach faces of T only in the limit. Move mass between pairs of
    // coordinates of the incumbent so minimisers inside an edge or face are found too.
    const auto lb = feasible.lower_bounds();
    auto value_at = [&](std::span<const double> t) {
      ++result.optimizer_evals;
      try {
        log_unnormalised_weights_into(concentration, t, batch, log_weights);
        return self_normalised_estimate(log_weights, values).estimate;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::numerical) throw;
        return std::numeric_limits<double>::infinity();
      }
    };
    SimplexPoint t = best ? best->tau : feasible.barycenter();
    double current = value_at(t);
    for (int sweep = 0; sweep < kPolishSweeps; ++sweep) {
      bool moved = false;
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
          const double mass = (t[i] - lb[i]) + (t[j] - lb[j]);
          if (!(mass > kBoundarySnap)) continue;
          auto along = [&](double a) {
            probe = t;
            probe[i] = lb[i] + a;
            probe[j] = lb[j] + (mass - a);
            return value_at(probe);
          };
          std::uintmax_t iterations = kPolishIterations;
          auto [a, v] = boost::math::tools::brent_find_minima(along, 0.0, mass, kPolishBits, iterations);
          for (double edge : {0.0, mass}) {
            const double ve = along(edge);
            if (ve < v) {
              a = edge;
              v = ve;
            }
          }
          if (v < current) {
            t[i] = lb[i] + a;
            t[j] = lb[j] + (mass - a);
            current = v;
            moved = true;
          }
        }
      }
      if (!moved) break;
    }
    consider(snap_to_boundary(t, feasible));
  }

  if (!best) throw_numerical_error("degenerate weights at every probe of the parameter set");
  result.tau = std::move(best->tau);
  result.value = best->report.estimate;
  result.ess_at_tau = best->report.ess;
  result.converged = all_converged;
  return result;
}

EnvelopeResult envelope_argmin(const SampleBatch& batch, const Gamble& gamble, double concentration,
                               const ConstrainedSimplex& feasible, const OptimizerConfig& config) {
  const std::vector<double> values = evaluate_gamble(gamble, batch);
  return envelope_argmin(batch, values, concentration, feasible, config);
}

double lower_estimate(const SampleBatch& batch, const Gamble& gamble, double concentration,
                      const ConstrainedSimplex& feasible, const OptimizerConfig& config) {
  return envelope_argmin(batch, gamble, concentration, feasible, config).value;
}

double upper_estimate(const SampleBatch& batch, std::span<const double> tau_external, std::span<const double> values,
                      double concentration, const ConstrainedSimplex& feasible) {
  if (!feasible.contains(tau_external)) throw_domain_error("upper estimate: parameter lies outside the feasible set");
  return estimate_at(batch, values, concentration, tau_external).estimate;
}

double upper_estimate(const SampleBatch& batch, std::span<const double> tau_external, const Gamble& gamble,
                      double concentration, const ConstrainedSimplex& feasible) {
  const std::vector<double> values = evaluate_gamble(gamble, batch);
  return upper_estimate(batch, tau_external, values, concentration, feasible);
}

}  // namespace lowprev
