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

#ifndef LOWPREV_DIAGNOSTICS_HPP
#define LOWPREV_DIAGNOSTICS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lowprev/model.hpp"
#include "lowprev/optimizer.hpp"
#include "lowprev/sampling.hpp"

/**
 * \file
 * \brief Empirical checks of the envelope estimator: residual-process distances,
 * bias decay in n, a coherence audit, two-level Monte Carlo and finite-grid
 * consistency.
 *
 * Everything here is replication based. Replication r of a study with seed S draws
 * from derive_seed(S, r, diagnostic(i)) streams, and aggregates run in replication
 * order, so results do not depend on the thread count.
 */

namespace lowprev {

/// Exact E_{p_t}[f] for linear and entropy gambles under Dirichlet(s t). Custom gambles are a domain error.
double exact_expectation(const Gamble& gamble, double concentration, std::span<const double> t);

/// Least-squares slope of log y on log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Z_n(t_i) = standard estimate at t_i minus its exact value, per replication and grid point.
struct ResidualProcessSample {
  std::vector<SimplexPoint> grid;
  std::size_t sample_size = 0;
  std::size_t replications = 0;
  /// replications x grid.size(), row major.
  std::vector<double> residuals;

  [[nodiscard]] double at(std::size_t replication, std::size_t point) const {
    return residuals[replication * grid.size() + point];
  }
};

struct ResidualSettings {
  DirichletParams sampling;
  std::size_t sample_size = 1;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  /// Draw a separate batch per grid point instead of sharing one batch across the grid.
  bool independent = false;
  unsigned threads = 1;
};

ResidualProcessSample sample_residual_process(const Gamble& gamble, double concentration,
                                              std::span<const SimplexPoint> grid, const ResidualSettings& settings);

/// Root mean square of Z(t_i) - Z(t_j) over replications. Needs at least 30 replications.
double empirical_d1(const ResidualProcessSample& sample, std::size_t i, std::size_t j);

/// Delta-method standard error of empirical_d1.
double empirical_d1_standard_error(const ResidualProcessSample& sample, std::size_t i, std::size_t j);

/// Root mean square of Z(t_i).
double residual_sd(const ResidualProcessSample& sample, std::size_t i);

/// max over pairs of |sqrt(n) d_n(i, j) / d_1(i, j) - 1|. Pairs with d_1 = 0 are skipped.
double scaling_check_dn(const ResidualProcessSample& at_n, const ResidualProcessSample& at_one);

struct ScalingRow {
  std::size_t sample_size = 0;
  double mean_error = 0.0;
  double mean_abs_error = 0.0;
  double standard_error = 0.0;
};

struct ScalingTable {
  std::vector<ScalingRow> rows;
  double exact_value = 0.0;
  /// log mean_abs_error against log n.
  double slope = 0.0;
};

struct BiasScalingSettings {
  DirichletParams sampling;
  std::vector<std::size_t> sample_sizes;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Mean |min over grid of the standard estimate - exact grid minimum| for each n, and its log-log slope.
ScalingTable empirical_bias_scaling(const Gamble& gamble, double concentration, std::span<const SimplexPoint> grid,
                                    const BiasScalingSettings& settings);

enum class AuditEstimator { self_normalised, standard };
enum class AuditMode { grid, optimizer };

struct CoherenceAuditSettings {
  AuditEstimator estimator = AuditEstimator::self_normalised;
  AuditMode mode = AuditMode::grid;
  /// Probe points for grid mode.
  std::vector<SimplexPoint> grid;
  /// Parameter set for optimizer mode.
  std::optional<ConstrainedSimplex> feasible;
  OptimizerConfig optimizer;
  double scale = 2.5;
  double shift = 1.5;
  double tolerance = 1e-10;
};

struct CoherenceCheck {
  std::string property;
  std::size_t evaluated = 0;
  std::size_t violations = 0;
  double max_magnitude = 0.0;
};

struct CoherenceViolation {
  std::string property;
  std::size_t pair = 0;
  double magnitude = 0.0;
};

struct CoherenceReport {
  /// bounded_below, superadditive, homogeneous, constant_additive, in that order.
  std::vector<CoherenceCheck> checks;
  std::vector<CoherenceViolation> violations;
  double tolerance = 0.0;
};

/// Audits lower(f) = min over the probe set of the estimate, with one batch shared by every gamble.
/**
 * For each pair (f, g): lower(f) >= min_i f(x_i), lower(f + g) >= lower(f) + lower(g),
 * lower(scale f) = scale lower(f) and lower(f + shift) = lower(f) + shift. Violations
 * above the tolerance are returned as data. The standard estimator is audited in grid
 * mode only.
 */
CoherenceReport coherence_audit(const SampleBatch& batch, double concentration,
                                std::span<const std::pair<Gamble, Gamble>> pairs,
                                const CoherenceAuditSettings& settings);

/// Pairs of linear gambles with coefficients uniform on [-5, 5].
std::vector<std::pair<Gamble, Gamble>> random_linear_gamble_pairs(std::size_t count, std::size_t dimension,
                                                                  std::uint64_t seed);

/// min over the grid of plain Monte Carlo means of f on n draws from each p_t.
/**
 * With shared_seed every grid point draws from the same stream, so estimates are
 * coupled through common random numbers; otherwise each point has its own stream.
 */
double two_level_mc(std::span<const SimplexPoint> grid, const Gamble& gamble, double concentration, std::size_t n,
                    bool shared_seed, std::uint64_t seed);

struct TwoLevelBias {
  double exact_value = 0.0;
  double mean_bias = 0.0;
  double standard_error = 0.0;
  std::size_t replications = 0;
};

/// Replicated two_level_mc minus the exact grid minimum.
TwoLevelBias two_level_bias(std::span<const SimplexPoint> grid, const Gamble& gamble, double concentration,
                            std::size_t n, bool shared_seed, std::size_t replications, std::uint64_t seed,
                            unsigned threads = 1);

struct ConsistencySettings {
  std::vector<std::size_t> sample_sizes;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct ConsistencyTable {
  std::vector<ScalingRow> rows;
  double exact_value = 0.0;
  /// Successive sizes where the mean absolute error did not drop.
  std::size_t inversions = 0;
  /// inversions <= 1.
  bool decreasing = false;
};

/// Mean absolute error of the shared-seed grid minimum for each n.
ConsistencyTable finite_T_consistency(const Gamble& gamble, double concentration, std::span<const SimplexPoint> grid,
                                      const ConsistencySettings& settings);

}  // namespace lowprev

#endif  // LOWPREV_DIAGNOSTICS_HPP
