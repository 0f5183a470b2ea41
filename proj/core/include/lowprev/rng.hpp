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

#ifndef LOWPREV_RNG_HPP
#define LOWPREV_RNG_HPP

#include <array>
#include <cstddef>
#include <cstdint>

namespace lowprev {

/// SplitMix64 output function (Steele, Lea and Flood). A bijection on 64 bits.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31U);
}

/// xoshiro256** 1.0 (Blackman and Vigna), seeded through SplitMix64.
/**
 * The generator is fully specified by its constants, so a seed produces the same
 * stream on every platform and compiler. Variates built on top of it (uniform,
 * normal) are implemented here as well instead of using <random> distributions,
 * whose algorithms are implementation-defined.
 */
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform() noexcept;

  /// Standard normal by the Marsaglia polar method (caches the second variate).
  double normal() noexcept;

 private:
  std::array<std::uint64_t, 4> state_{};
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Labels the independent random streams of one replication.
struct Stream {
  enum class Kind : std::uint32_t {
    primary = 0,
    paired = 1,
    iteration = 2,
    direct = 3,
    stability = 4,
    diagnostic = 5,
  };

  Kind kind = Kind::primary;
  std::uint32_t index = 0;

  static constexpr Stream primary() noexcept { return {Kind::primary, 0}; }
  static constexpr Stream paired() noexcept { return {Kind::paired, 0}; }
  static constexpr Stream iteration(std::uint32_t i) noexcept { return {Kind::iteration, i}; }
  static constexpr Stream direct() noexcept { return {Kind::direct, 0}; }
  static constexpr Stream stability() noexcept { return {Kind::stability, 0}; }
  static constexpr Stream diagnostic(std::uint32_t i) noexcept { return {Kind::diagnostic, i}; }
};

/// Seed for replication `replication` on stream `stream` of an experiment keyed by `master`.
/**
 * The (replication, stream) pair is packed into 64 bits (replication in the low 32,
 * stream index in the next 24, stream kind in the top 8) and pushed through two
 * SplitMix64 rounds keyed by the master seed. Every step is a bijection, so for a
 * fixed master distinct pairs never collide.
 */
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication, Stream stream) noexcept;

/// Seed of sub-stream `index` below `seed` (used for per-coordinate generators).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace lowprev

#endif  // LOWPREV_RNG_HPP
