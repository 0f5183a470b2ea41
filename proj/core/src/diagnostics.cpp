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

#include "lowprev/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lowprev/envelope.hpp"
#include "lowprev/error.hpp"
#include "lowprev/estimator.hpp"
#include "lowprev/parallel.hpp"
#include "lowprev/rng.hpp"

namespace lowprev {

namespace {

constexpr std::size_t kMinDistanceReplications = 30;

void check_grid(std::span<const SimplexPoint> grid, std::size_t dimension) {
  if (grid.empty()) throw_domain_error("grid is empty");
  for (const auto& t : grid) {
    if (t.size() != dimension) throw_domain_error("grid point has the wrong dimension");
    checked_simplex_point(t);
  }
}

double grid_minimum(const Gamble& gamble, double s, std::span<const SimplexPoint> grid) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : grid) best = std::min(best, exact_expectation(gamble, s, t));
  return best;
}

struct Moments {
  double mean;
  double standard_error;
};

Moments moments(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return {mean, sd / std::sqrt(static_cast<double>(v.size()))};
}

void check_pair(const ResidualProcessSample& sample, std::size_t i, std::size_t j) {
  if (i >= sample.grid.size() || j >= sample.grid.size()) throw_domain_error("grid index out of range");
  if (sample.replications < kMinDistanceReplications) {
    throw_domain_error("distance estimates need at least 30 replications");
  }
}

std::vector<double> squared_differences(const ResidualProcessSample& sample, std::size_t i, std::size_t j) {
  std::vector<double> sq(sample.replications);
  for (std::size_t r = 0; r < sample.replications; ++r) {
    const double d = sample.at(r, i) - sample.at(r, j);
    sq[r] = d * d;
  }
  return sq;
}

void add_check(CoherenceReport& report, std::size_t index, std::size_t pair, double magnitude) {
  CoherenceCheck& check = report.checks[index];
  ++check.evaluated;
  check.max_magnitude = std::max(check.max_magnitude, magnitude);
  if (magnitude > report.tolerance) {
    ++check.violations;
    report.violations.push_back({check.property, pair, magnitude});
  }
}

}  // namespace

double exact_expectation(const Gamble& gamble, double concentration, std::span<const double> t) {
  switch (gamble.kind()) {
    case Gamble::Kind::linear:
      return exact_expectation_linear(gamble.coefficients(), t);
    case Gamble::Kind::entropy:
      return exact_expectation_entropy(concentration, t);
    case Gamble::Kind::custom:
      break;
  }
  throw_domain_error("no exact expectation for gamble '" + gamble.name() + "'");
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw_domain_error("slope needs at least two matching points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw_domain_error("log-log slope needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw_domain_error("log-log slope needs distinct x values");
  return sxy / sxx;
}

ResidualProcessSample sample_residual_process(const Gamble& gamble, double concentration,
                                              std::span<const SimplexPoint> grid, const ResidualSettings& settings) {
  const std::size_t k = settings.sampling.mean.size();
  check_grid(grid, k);
  if (grid.size() < 2) throw_domain_error("residual process needs at least two grid points");
  if (settings.sample_size == 0 || settings.replications == 0) throw_domain_error("empty residual study");

  ResidualProcessSample out;
  out.grid.assign(grid.begin(), grid.end());
  out.sample_size = settings.sample_size;
  out.replications = settings.replications;
  out.residuals.resize(settings.replications * grid.size());

  std::vector<double> exact(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) exact[i] = exact_expectation(gamble, concentration, grid[i]);

  parallel_for(settings.replications, settings.threads, [&](std::size_t r) {
    std::optional<SampleBatch> shared;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (settings.independent || !shared) {
        const auto stream = Stream::diagnostic(settings.independent ? static_cast<std::uint32_t>(i) : 0U);
        shared = sample_dirichlet(settings.sampling, settings.sample_size, derive_seed(settings.seed, r, stream));
      }
      const std::vector<double> f = evaluate_gamble(gamble, *shared);
      const std::vector<double> w = density_ratios(concentration, grid[i], *shared);
      out.residuals[r * grid.size() + i] = standard_estimate(w, f).estimate - exact[i];
    }
  });
  return out;
}

double empirical_d1(const ResidualProcessSample& sample, std::size_t i, std::size_t j) {
  check_pair(sample, i, j);
  if (i == j) return 0.0;
  const std::vector<double> sq = squared_differences(sample, i, j);
  double total = 0.0;
  for (double v : sq) total += v;
  return std::sqrt(total / static_cast<double>(sq.size()));
}

double empirical_d1_standard_error(const ResidualProcessSample& sample, std::size_t i, std::size_t j) {
  check_pair(sample, i, j);
  if (i == j) return 0.0;
  const Moments m = moments(squared_differences(sample, i, j));
  if (!(m.mean > 0.0)) return 0.0;
  return m.standard_error / (2.0 * std::sqrt(m.mean));
}

double residual_sd(const ResidualProcessSample& sample, std::size_t i) {
  if (i >= sample.grid.size()) throw_domain_error("grid index out of range");
  double total = 0.0;
  for (std::size_t r = 0; r < sample.replications; ++r) total += sample.at(r, i) * sample.at(r, i);
  return std::sqrt(total / static_cast<double>(sample.replications));
}

double scaling_check_dn(const ResidualProcessSample& at_n, const ResidualProcessSample& at_one) {
  if (at_n.grid != at_one.grid) throw_domain_error("scaling check needs the same grid at both sizes");
  const double root = std::sqrt(static_cast<double>(at_n.sample_size) / static_cast<double>(at_one.sample_size));
  double worst = 0.0;
  for (std::size_t i = 0; i < at_n.grid.size(); ++i) {
    for (std::size_t j = i + 1; j < at_n.grid.size(); ++j) {
      const double base = empirical_d1(at_one, i, j);
      if (base == 0.0) continue;
      worst = std::max(worst, std::abs(root * empirical_d1(at_n, i, j) / base - 1.0));
    }
  }
  return worst;
}

ScalingTable empirical_bias_scaling(const Gamble& gamble, double concentration, std::span<const SimplexPoint> grid,
                                    const BiasScalingSettings& settings) {
  check_grid(grid, settings.sampling.mean.size());
  if (settings.replications < 2) throw_domain_error("bias study needs at least 2 replications");
  if (settings.sample_sizes.empty()) throw_domain_error("bias study needs at least one sample size");

  ScalingTable table;
  table.exact_value = grid_minimum(gamble, concentration, grid);
  std::vector<double> sizes;
  std::vector<double> errors;
  for (std::size_t m = 0; m < settings.sample_sizes.size(); ++m) {
    const std::size_t n = settings.sample_sizes[m];
    if (n == 0) throw_domain_error("sample sizes must be positive");
    std::vector<double> signed_error(settings.replications);
    parallel_for(settings.replications, settings.threads, [&](std::size_t r) {
      const SampleBatch batch = sample_dirichlet(
          settings.sampling, n, derive_seed(settings.seed, r, Stream::diagnostic(static_cast<std::uint32_t>(m))));
      const std::vector<double> f = evaluate_gamble(gamble, batch);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& t : grid) {
        best = std::min(best, standard_estimate(density_ratios(concentration, t, batch), f).estimate);
      }
      signed_error[r] = best - table.exact_value;
    });
    std::vector<double> abs_error(signed_error.size());
    std::transform(signed_error.begin(), signed_error.end(), abs_error.begin(), [](double e) { return std::abs(e); });
    const Moments a = moments(abs_error);
    table.rows.push_back({n, moments(signed_error).mean, a.mean, a.standard_error});
    sizes.push_back(static_cast<double>(n));
    errors.push_back(a.mean);
  }
  if (sizes.size() >= 2) table.slope = loglog_slope(sizes, errors);
  return table;
}

CoherenceReport coherence_audit(const SampleBatch& batch, double concentration,
                                std::span<const std::pair<Gamble, Gamble>> pairs,
                                const CoherenceAuditSettings& settings) {
  if (!(settings.scale > 0.0)) throw_domain_error("coherence audit scale must be positive");
  if (!(settings.tolerance >= 0.0)) throw_domain_error("coherence audit tolerance must be nonnegative");
  const bool grid_mode = settings.mode == AuditMode::grid;
  if (grid_mode) {
    check_grid(settings.grid, batch.dimension());
  } else {
    if (!settings.feasible) throw_domain_error("optimizer audit needs a parameter set");
    if (settings.estimator == AuditEstimator::standard) {
      throw_domain_error("the standard estimator is audited in grid mode only");
    }
  }

  // Weights per probe are computed once and reused for every gamble.
  std::vector<std::vector<double>> weights;
  if (grid_mode) {
    for (const auto& t : settings.grid) {
      weights.push_back(settings.estimator == AuditEstimator::standard
                            ? density_ratios(concentration, t, batch)
                            : log_unnormalised_weights(concentration, t, batch).values);
    }
  }

  auto lower = [&](std::span<const double> values) {
    if (!grid_mode) {
      return envelope_argmin(batch, values, concentration, *settings.feasible, settings.optimizer).value;
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : weights) {
      const double e = settings.estimator == AuditEstimator::standard ? standard_estimate(w, values).estimate
                                                                      : self_normalised_estimate(w, values).estimate;
      best = std::min(best, e);
    }
    return best;
  };

  CoherenceReport report;
  report.tolerance = settings.tolerance;
  for (const char* name : {"bounded_below", "superadditive", "homogeneous", "constant_additive"}) {
    report.checks.push_back({name, 0, 0, 0.0});
  }

  const std::size_t n = batch.size();
  std::vector<double> sum(n);
  std::vector<double> scaled(n);
  std::vector<double> shifted(n);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const std::vector<double> f = evaluate_gamble(pairs[p].first, batch);
    const std::vector<double> g = evaluate_gamble(pairs[p].second, batch);
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] = f[i] + g[i];
      scaled[i] = settings.scale * f[i];
      shifted[i] = f[i] + settings.shift;
    }
    const double lf = lower(f);
    const double lg = lower(g);
    add_check(report, 0, p, std::max(0.0, *std::min_element(f.begin(), f.end()) - lf));
    add_check(report, 0, p, std::max(0.0, *std::min_element(g.begin(), g.end()) - lg));
    add_check(report, 1, p, std::max(0.0, lf + lg - lower(sum)));
    add_check(report, 2, p, std::abs(lower(scaled) - settings.scale * lf));
    add_check(report, 3, p, std::abs(lower(shifted) - lf - settings.shift));
  }
  return report;
}

std::vector<std::pair<Gamble, Gamble>> random_linear_gamble_pairs(std::size_t count, std::size_t dimension,
                                                                  std::uint64_t seed) {
  Xoshiro256 rng(seed);
  auto draw = [&] {
    std::vector<double> c(dimension);
    for (double& v : c) v = -5.0 + 10.0 * rng.uniform();
    return Gamble::linear(std::move(c));
  };
  std::vector<std::pair<Gamble, Gamble>> pairs;
  pairs.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    Gamble f = draw();
    pairs.emplace_back(std::move(f), draw());
  }
  return pairs;
}

double two_level_mc(std::span<const SimplexPoint> grid, const Gamble& gamble, double concentration, std::size_t n,
                    bool shared_seed, std::uint64_t seed) {
  if (grid.empty()) throw_domain_error("grid is empty");
  if (n == 0) throw_domain_error("two-level Monte Carlo needs n >= 1");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const DirichletParams p = make_dirichlet(concentration, grid[i]);
    const auto stream = Stream::diagnostic(shared_seed ? 0U : static_cast<std::uint32_t>(i));
    const SampleBatch batch = sample_dirichlet(p, n, derive_seed(seed, 0, stream));
    double total = 0.0;
    for (double v : evaluate_gamble(gamble, batch)) total += v;
    best = std::min(best, total / static_cast<double>(n));
  }
  return best;
}

TwoLevelBias two_level_bias(std::span<const SimplexPoint> grid, const Gamble& gamble, double concentration,
                            std::size_t n, bool shared_seed, std::size_t replications, std::uint64_t seed,
                            unsigned threads) {
  if (replications < 2) throw_domain_error("bias study needs at least 2 replications");
  check_grid(grid, grid.empty() ? 0 : grid.front().size());
  TwoLevelBias out;
  out.exact_value = grid_minimum(gamble, concentration, grid);
  out.replications = replications;
  std::vector<double> bias(replications);
  parallel_for(replications, threads, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(seed, r, Stream::diagnostic(0));
    bias[r] = two_level_mc(grid, gamble, concentration, n, shared_seed, rep_seed) - out.exact_value;
  });
  const Moments m = moments(bias);
  out.mean_bias = m.mean;
  out.standard_error = m.standard_error;
  return out;
}

ConsistencyTable finite_T_consistency(const Gamble& gamble, double concentration, std::span<const SimplexPoint> grid,
                                      const ConsistencySettings& settings) {
  check_grid(grid, grid.empty() ? 0 : grid.front().size());
  if (settings.replications < 2) throw_domain_error("consistency study needs at least 2 replications");
  if (settings.sample_sizes.empty()) throw_domain_error("consistency study needs at least one sample size");

  ConsistencyTable table;
  table.exact_value = grid_minimum(gamble, concentration, grid);
  for (std::size_t m = 0; m < settings.sample_sizes.size(); ++m) {
    const std::size_t n = settings.sample_sizes[m];
    std::vector<double> signed_error(settings.replications);
    parallel_for(settings.replications, settings.threads, [&](std::size_t r) {
      const std::uint64_t rep_seed =
          derive_seed(settings.seed, r, Stream::diagnostic(static_cast<std::uint32_t>(m)));
      signed_error[r] = two_level_mc(grid, gamble, concentration, n, true, rep_seed) - table.exact_value;
    });
    std::vector<double> abs_error(signed_error.size());
    std::transform(signed_error.begin(), signed_error.end(), abs_error.begin(), [](double e) { return std::abs(e); });
    const Moments a = moments(abs_error);
    table.rows.push_back({n, moments(signed_error).mean, a.mean, a.standard_error});
  }
  for (std::size_t m = 1; m < table.rows.size(); ++m) {
    if (!(table.rows[m].mean_abs_error < table.rows[m - 1].mean_abs_error)) ++table.inversions;
  }
  table.decreasing = table.inversions <= 1;
  return table;
}

}  // namespace lowprev
