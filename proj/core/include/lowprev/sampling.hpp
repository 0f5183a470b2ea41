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

#ifndef LOWPREV_SAMPLING_HPP
#define LOWPREV_SAMPLING_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "lowprev/model.hpp"
#include "lowprev/rng.hpp"

namespace lowprev {

/// n simplex points drawn i.i.d. from a Dirichlet sampling density q.
/**
 * Points are stored row-major together with their elementwise logarithms. The
 * logarithms are produced directly by the sampler (normalisation happens in log
 * space), so they stay finite even when a coordinate underflows to 0 in linear scale.
 */
class SampleBatch {
 public:
  /// Wraps externally produced log-coordinates; every row must lie on the simplex.
  static SampleBatch from_log_points(DirichletParams source, std::uint64_t seed, std::size_t dimension,
                                     std::vector<double> log_points);

  /// Wraps linear-scale rows (for instance loaded from CSV). Rows must be strictly positive.
  static SampleBatch from_points(DirichletParams source, std::uint64_t seed, std::size_t dimension,
                                 std::vector<double> points);

  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] const DirichletParams& source() const noexcept { return source_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  [[nodiscard]] std::span<const double> point(std::size_t i) const noexcept {
    return {points_.data() + i * dimension_, dimension_};
  }
  [[nodiscard]] std::span<const double> log_point(std::size_t i) const noexcept {
    return {log_points_.data() + i * dimension_, dimension_};
  }
  [[nodiscard]] std::span<const double> points() const noexcept { return points_; }
  [[nodiscard]] std::span<const double> log_points() const noexcept { return log_points_; }

 private:
  friend SampleBatch sample_dirichlet(const DirichletParams& q, std::size_t n, std::uint64_t seed);

  SampleBatch(DirichletParams source, std::uint64_t seed, std::size_t dimension, std::vector<double> points,
              std::vector<double> log_points);

  DirichletParams source_;
  std::uint64_t seed_;
  std::size_t dimension_;
  std::size_t size_;
  std::vector<double> points_;
  std::vector<double> log_points_;
};

/// ln of a Gamma(shape, 1) variate by Marsaglia and Tsang's squeeze method.
/**
 * For shape < 1 the draw is Gamma(shape + 1) * U^(1 / shape); the uniform comes
 * from `boost_rng` so that `rng` consumes the same numbers for shapes a and a + 1.
 * Working on the log scale keeps tiny shapes from underflowing to zero.
 */
double sample_log_gamma(double shape, Xoshiro256& rng, Xoshiro256& boost_rng);

/// n i.i.d. Dirichlet(s t) points; bit-identical for identical (q, n, seed).
/**
 * Coordinate j has its own pair of generators derived from the seed, so batches
 * drawn with a shared seed under different parameters use common random numbers.
 */
SampleBatch sample_dirichlet(const DirichletParams& q, std::size_t n, std::uint64_t seed);

/// Evaluates the gamble on every row.
std::vector<double> evaluate_gamble(const Gamble& gamble, const SampleBatch& batch);

/// Debug dump: one row per sample, comma separated, shortest round-trip decimals.
void write_batch_csv(const SampleBatch& batch, std::ostream& out);

/// Reads rows written by write_batch_csv.
SampleBatch read_batch_csv(std::istream& in, DirichletParams source, std::uint64_t seed);

}  // namespace lowprev

#endif  // LOWPREV_SAMPLING_HPP
