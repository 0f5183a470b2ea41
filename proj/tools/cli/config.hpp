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

#ifndef LOWPREV_CLI_CONFIG_HPP
#define LOWPREV_CLI_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <lowprev/model.hpp>
#include <lowprev/optimizer.hpp>

namespace lowprev::cli {

struct GambleSpec {
  std::string kind = "linear";
  std::vector<double> coefficients;

  [[nodiscard]] Gamble build() const;
};

struct ModelSpec {
  double concentration = 0.0;
  std::vector<double> lower_bounds;
  /// Sampling mean: the proposal for `plain`, the starting point for `iterate`, the target for `direct-ci`.
  SimplexPoint sampling_t;
  double sampling_concentration = 0.0;

  [[nodiscard]] ConstrainedSimplex feasible() const { return ConstrainedSimplex(lower_bounds); }
};

struct RunSpec {
  std::uint64_t seed = 0;
  double level = 0.95;
  std::size_t replications = 0;  // N
  std::size_t sample_size = 0;   // n
  /// (N, n) columns for `plain`; defaults to the single pair (N, n).
  std::vector<std::pair<std::size_t, std::size_t>> plain_sizes;
  bool fast_mode = false;
  double ess_fraction = 0.95;
  std::size_t max_iter = 10;
  bool fresh_seeds = false;
  std::size_t stability_replications = 8;
  double tau_tolerance = 0.02;
  double beta = 0.0;
};

/// Model and gamble for one diagnostic; falls back to [model] and [gamble].
struct StudySpec {
  double concentration = 0.0;
  std::vector<double> lower_bounds;
  GambleSpec gamble;
  /// "vertices", "random:<m>" or explicit points "a b c; d e f".
  std::string grid = "vertices";
  SimplexPoint sampling_t;
  double sampling_concentration = 0.0;

  [[nodiscard]] ConstrainedSimplex feasible() const { return ConstrainedSimplex(lower_bounds); }
};

/// Expands the grid description. Random grids are drawn uniformly on the parameter set from `seed`.
std::vector<SimplexPoint> resolve_grid(const StudySpec& study, std::uint64_t seed);

struct D1Spec {
  StudySpec study;
  std::vector<std::size_t> sizes{1, 4, 16, 64};
  std::size_t replications = 500;
  bool independent = false;
  double max_deviation = 0.15;
};

struct BiasSpec {
  StudySpec study;
  std::vector<std::size_t> sizes{16, 64, 256, 1024};
  std::size_t replications = 200;
  double slope_min = -0.65;
  double slope_max = -0.35;
};

struct CoherenceSpec {
  StudySpec study;
  std::size_t pairs = 50;
  std::size_t sample_size = 128;
  double tolerance = 1e-10;
  double scale = 2.5;
  double shift = 1.5;
  bool optimizer_audit = false;
  std::size_t max_violations = 0;
};

struct TwoLevelSpec {
  StudySpec study;
  std::size_t sample_size = 256;
  std::size_t replications = 200;
  double min_separation = 2.0;
};

struct ConsistencySpec {
  StudySpec study;
  std::vector<std::size_t> sizes{16, 64, 256, 1024, 4096};
  std::size_t replications = 100;
  std::size_t max_inversions = 1;
};

struct DiagnoseSpec {
  std::vector<std::string> selected;
  D1Spec d1;
  BiasSpec bias;
  CoherenceSpec coherence;
  TwoLevelSpec two_level;
  ConsistencySpec consistency;
};

struct ExperimentConfig {
  ModelSpec model;
  GambleSpec gamble;
  RunSpec run;
  OptimizerConfig optimizer;
  DiagnoseSpec diagnose;
  /// FNV-1a of the config file bytes, 16 hex digits.
  std::string hash;
};

inline const std::vector<std::string>& diagnostic_names() {
  static const std::vector<std::string> names{"d1", "bias", "coherence", "two-level", "consistency"};
  return names;
}

std::string fnv1a_hex(const std::string& bytes);

/// Parses and validates an INI document. Errors are domain errors naming the field, e.g. "run.N: ...".
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace lowprev::cli

#endif  // LOWPREV_CLI_CONFIG_HPP
