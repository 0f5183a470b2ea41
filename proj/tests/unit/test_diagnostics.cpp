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

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lowprev/diagnostics.hpp"
#include "lowprev/error.hpp"
#include "lowprev/model.hpp"
#include "lowprev/sampling.hpp"
#include "oracles.hpp"

namespace lowprev {
namespace {

// Residual-process setting on k = 2 with finite fourth moments of the weights.
const std::vector<SimplexPoint> kPairGrid{{0.4, 0.6}, {0.5, 0.5}};
const std::vector<SimplexPoint> kTripleGrid{{0.4, 0.6}, {0.45, 0.55}, {0.5, 0.5}};

ResidualSettings residual_settings(std::size_t n, std::size_t N, std::uint64_t seed, bool independent = false) {
  ResidualSettings s;
  s.sampling = make_dirichlet(3.0, std::vector<double>{0.45, 0.55});
  s.sample_size = n;
  s.replications = N;
  s.seed = seed;
  s.independent = independent;
  return s;
}

std::vector<SimplexPoint> vertices(const ConstrainedSimplex& T) {
  std::vector<SimplexPoint> v;
  for (std::size_t j = 0; j < T.dimension(); ++j) v.push_back(T.vertex(j));
  return v;
}

TEST(ExactExpectation, DispatchesOnKind) {
  EXPECT_NEAR(exact_expectation(Gamble::linear({1, 2}), 3.0, std::vector<double>{0.25, 0.75}), 1.75, 1e-15);
  EXPECT_NEAR(exact_expectation(Gamble::entropy(), 10.0, std::vector<double>{0.3, 0.7}), 3553.0 / 6300.0, 1e-13);
  const auto custom = Gamble::custom("c", [](std::span<const double> x) { return x[0]; });
  EXPECT_THROW(exact_expectation(custom, 1.0, std::vector<double>{0.5, 0.5}), Error);
}

TEST(LogLogSlope, PowerLaw) {
  const std::vector<double> x{16, 64, 256, 1024};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -0.5));
  EXPECT_NEAR(loglog_slope(x, y), -0.5, 1e-12);
  EXPECT_THROW(loglog_slope(std::vector<double>{1.0}, std::vector<double>{1.0}), Error);
  EXPECT_THROW(loglog_slope(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 0.0}), Error);
}

TEST(D1, ReflexiveAndSymmetric) {
  const auto f = Gamble::linear({1.0, -1.0});
  const auto sample = sample_residual_process(f, 10.0, kTripleGrid, residual_settings(1, 200, 3));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(empirical_d1(sample, i, i), 0.0);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(empirical_d1(sample, i, j), empirical_d1(sample, j, i));
  }
  EXPECT_THROW(empirical_d1(sample, 0, 3), Error);
  const auto small = sample_residual_process(f, 10.0, kPairGrid, residual_settings(1, 29, 3));
  EXPECT_THROW(empirical_d1(small, 0, 1), Error);
}

TEST(D1, MatchesQuadratureOracle) {
  const auto f = Gamble::linear({1.0, -1.0});
  const auto sample = sample_residual_process(f, 10.0, kPairGrid, residual_settings(1, 2000, 5));
  const double expected = oracle::d1_linear_k2(10.0, 0.4, 0.5, 3.0, 0.45, 1.0, -1.0);
  const double got = empirical_d1(sample, 0, 1);
  const double se = empirical_d1_standard_error(sample, 0, 1);
  EXPECT_GT(se, 0.0);
  EXPECT_NEAR(got, expected, 3.0 * se) << "oracle " << expected;
}

TEST(D1, TriangleInequality) {
  const auto f = Gamble::linear({2.0, -0.5});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = sample_residual_process(f, 10.0, kTripleGrid, residual_settings(1, 500, seed));
    const std::size_t triples[][3] = {{0, 1, 2}, {1, 0, 2}, {0, 2, 1}};
    for (const auto& t : triples) {
      const double lhs = empirical_d1(s, t[0], t[2]);
      const double rhs = empirical_d1(s, t[0], t[1]) + empirical_d1(s, t[1], t[2]);
      const double slack = 3.0 * (empirical_d1_standard_error(s, t[0], t[2]) +
                                  empirical_d1_standard_error(s, t[0], t[1]) +
                                  empirical_d1_standard_error(s, t[1], t[2]));
      EXPECT_LE(lhs, rhs + slack);
    }
  }
}

TEST(D1, IndependentNoiseIsTheSudakovBadCase) {
  const auto f = Gamble::linear({1.0, -1.0});
  const auto shared = sample_residual_process(f, 10.0, kPairGrid, residual_settings(1, 1000, 8, false));
  const auto indep = sample_residual_process(f, 10.0, kPairGrid, residual_settings(1, 1000, 8, true));
  const double sigma = std::min(residual_sd(indep, 0), residual_sd(indep, 1));
  const double d = empirical_d1(indep, 0, 1);
  EXPECT_GE(d, std::sqrt(2.0) * sigma - 3.0 * empirical_d1_standard_error(indep, 0, 1));
  EXPECT_GT(d, 2.0 * empirical_d1(shared, 0, 1));
}

TEST(Dn, ScalingAgainstOneOverRootN) {
  const auto f = Gamble::linear({1.0, -1.0});
  const auto at_one = sample_residual_process(f, 10.0, kPairGrid, residual_settings(1, 500, 11));
  EXPECT_EQ(scaling_check_dn(at_one, at_one), 0.0);

  std::vector<double> sizes;
  std::vector<double> distances;
  for (std::size_t n : {4, 16, 64}) {
    const auto at_n = sample_residual_process(f, 10.0, kPairGrid, residual_settings(n, 500, 11 + n));
    EXPECT_LE(scaling_check_dn(at_n, at_one), 0.15) << n;
    sizes.push_back(static_cast<double>(n));
    distances.push_back(empirical_d1(at_n, 0, 1));
  }
  EXPECT_NEAR(loglog_slope(sizes, distances), -0.5, 0.1);

  const auto other = sample_residual_process(f, 10.0, kTripleGrid, residual_settings(1, 50, 1));
  EXPECT_THROW(scaling_check_dn(other, at_one), Error);
}

TEST(Dn, ReproducibleAcrossThreads) {
  const auto f = Gamble::linear({1.0, -1.0});
  auto a = residual_settings(4, 64, 2);
  auto b = a;
  b.threads = 3;
  EXPECT_EQ(sample_residual_process(f, 10.0, kPairGrid, a).residuals,
            sample_residual_process(f, 10.0, kPairGrid, b).residuals);
}

struct BiasFixture : ::testing::Test {
  ConstrainedSimplex T = ConstrainedSimplex::uniform(5, 0.1);
  Gamble f = Gamble::linear({1, 2, 5, 4, -3});
  BiasScalingSettings settings(std::vector<std::size_t> sizes, std::size_t N, std::uint64_t seed) const {
    BiasScalingSettings s;
    s.sampling = make_dirichlet(1.0, std::vector<double>(5, 0.2));
    s.sample_sizes = std::move(sizes);
    s.replications = N;
    s.seed = seed;
    return s;
  }
};

TEST_F(BiasFixture, SlopeNearMinusHalf) {
  const auto grid = vertices(T);
  const auto table = empirical_bias_scaling(f, 2.0, grid, settings({16, 64, 256, 1024}, 200, 7));
  EXPECT_DOUBLE_EQ(table.exact_value, -0.6);
  ASSERT_EQ(table.rows.size(), 4U);
  EXPECT_GE(table.slope, -0.65);
  EXPECT_LE(table.slope, -0.35);
  // E[min] <= min E, so the mean error cannot sit significantly above zero.
  for (const auto& row : table.rows) {
    const double second_moment = row.standard_error * row.standard_error * 200 + row.mean_abs_error * row.mean_abs_error;
    EXPECT_LE(row.mean_error, 3.0 * std::sqrt(second_moment / 200)) << row.sample_size;
  }
}

TEST_F(BiasFixture, SingletonGridIsUnbiased) {
  const std::vector<SimplexPoint> grid{T.vertex(4)};
  const std::size_t N = 400;
  const auto table = empirical_bias_scaling(f, 2.0, grid, settings({64}, N, 9));
  const auto& row = table.rows.front();
  // Var(e) <= E[e^2] = Var|e| + (E|e|)^2.
  const double second_moment = row.standard_error * row.standard_error * N + row.mean_abs_error * row.mean_abs_error;
  EXPECT_LE(std::fabs(row.mean_error), 3.0 * std::sqrt(second_moment / N));
}

TEST_F(BiasFixture, OuterStandardErrorShrinksWithReplications) {
  const auto grid = vertices(T);
  const auto small = empirical_bias_scaling(f, 2.0, grid, settings({64}, 100, 13));
  const auto large = empirical_bias_scaling(f, 2.0, grid, settings({64}, 1600, 13));
  const double ratio = small.rows[0].standard_error / large.rows[0].standard_error;
  EXPECT_GT(ratio, 4.0 / 1.5);
  EXPECT_LT(ratio, 4.0 * 1.5);
}

struct CoherenceFixture : ::testing::Test {
  ConstrainedSimplex T = ConstrainedSimplex::uniform(5, 0.1);
  std::vector<SimplexPoint> grid;
  void SetUp() override {
    // Twenty feasible points: the vertices, the barycenter and midpoints of vertex pairs.
    for (std::size_t j = 0; j < 5; ++j) grid.push_back(T.vertex(j));
    grid.push_back(T.barycenter());
    for (std::size_t a = 0; a < 5 && grid.size() < 20; ++a) {
      for (std::size_t b = a + 1; b < 5 && grid.size() < 20; ++b) {
        SimplexPoint m(5);
        for (std::size_t j = 0; j < 5; ++j) m[j] = 0.5 * (T.vertex(a)[j] + T.vertex(b)[j]);
        grid.push_back(m);
      }
    }
    for (std::size_t j = 0; grid.size() < 20; ++j) {
      SimplexPoint m(5);
      for (std::size_t i = 0; i < 5; ++i) m[i] = 0.5 * (T.vertex(j)[i] + T.barycenter()[i]);
      grid.push_back(m);
    }
  }
};

TEST_F(CoherenceFixture, SelfNormalisedGridHasNoViolations) {
  ASSERT_EQ(grid.size(), 20U);
  const auto batch = sample_dirichlet(make_dirichlet(2.0, std::vector<double>(5, 0.2)), 128, 31);
  const auto pairs = random_linear_gamble_pairs(50, 5, 32);
  CoherenceAuditSettings s;
  s.grid = grid;
  const auto report = coherence_audit(batch, 2.0, pairs, s);
  ASSERT_EQ(report.checks.size(), 4U);
  EXPECT_EQ(report.checks[0].property, "bounded_below");
  EXPECT_EQ(report.checks[1].property, "superadditive");
  EXPECT_EQ(report.checks[2].property, "homogeneous");
  EXPECT_EQ(report.checks[3].property, "constant_additive");
  EXPECT_EQ(report.checks[0].evaluated, 100U);
  EXPECT_EQ(report.checks[1].evaluated, 50U);
  EXPECT_TRUE(report.violations.empty());
  for (const auto& c : report.checks) {
    EXPECT_EQ(c.violations, 0U) << c.property;
    EXPECT_LE(c.max_magnitude, 1e-10) << c.property;
  }
}

TEST_F(CoherenceFixture, TrivialScaleAndShiftAreExact) {
  const auto batch = sample_dirichlet(make_dirichlet(2.0, std::vector<double>(5, 0.2)), 64, 33);
  const auto pairs = random_linear_gamble_pairs(10, 5, 34);
  CoherenceAuditSettings s;
  s.grid = grid;
  s.scale = 1.0;
  s.shift = 0.0;
  s.tolerance = 0.0;
  const auto report = coherence_audit(batch, 2.0, pairs, s);
  EXPECT_EQ(report.checks[2].max_magnitude, 0.0);
  EXPECT_EQ(report.checks[3].max_magnitude, 0.0);
}

TEST_F(CoherenceFixture, StandardEstimatorBreaksConstantAdditivity) {
  // The proposal is not a grid point, so no probe has mean weight exactly 1.
  const auto batch = sample_dirichlet(make_dirichlet(2.0, std::vector<double>{0.5, 0.2, 0.1, 0.1, 0.1}), 128, 35);
  const auto pairs = random_linear_gamble_pairs(50, 5, 36);
  CoherenceAuditSettings s;
  s.grid = grid;
  s.estimator = AuditEstimator::standard;
  const auto report = coherence_audit(batch, 2.0, pairs, s);
  EXPECT_EQ(report.checks[3].violations, 50U);
  EXPECT_GT(report.checks[3].max_magnitude, 1e-3);
  EXPECT_FALSE(report.violations.empty());
}

TEST_F(CoherenceFixture, OptimizerModeWithinSlack) {
  const auto batch = sample_dirichlet(make_dirichlet(2.0, std::vector<double>(5, 0.2)), 64, 37);
  const auto pairs = random_linear_gamble_pairs(10, 5, 38);
  CoherenceAuditSettings s;
  s.mode = AuditMode::optimizer;
  s.feasible = T;
  s.tolerance = 1e-6;
  const auto report = coherence_audit(batch, 2.0, pairs, s);
  EXPECT_EQ(report.checks[0].violations, 0U);
  EXPECT_EQ(report.checks[0].evaluated, 20U);

  s.feasible.reset();
  EXPECT_THROW(coherence_audit(batch, 2.0, pairs, s), Error);
}

TEST(RandomGamblePairs, DeterministicAndInRange) {
  const auto a = random_linear_gamble_pairs(20, 4, 1);
  const auto b = random_linear_gamble_pairs(20, 4, 1);
  ASSERT_EQ(a.size(), 20U);
  for (std::size_t p = 0; p < a.size(); ++p) {
    const auto ca = a[p].first.coefficients();
    const auto cb = b[p].first.coefficients();
    EXPECT_TRUE(std::equal(ca.begin(), ca.end(), cb.begin(), cb.end()));
    for (double c : ca) {
      EXPECT_GE(c, -5.0);
      EXPECT_LE(c, 5.0);
    }
  }
}

TEST(TwoLevel, IdenticalPointsAndDeterminism) {
  const std::vector<SimplexPoint> one{{0.2, 0.3, 0.5}};
  const std::vector<SimplexPoint> same{{0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}};
  const auto f = Gamble::linear({1.0, -2.0, 0.5});
  EXPECT_EQ(two_level_mc(same, f, 4.0, 100, true, 3), two_level_mc(one, f, 4.0, 100, true, 3));
  EXPECT_EQ(two_level_mc(same, f, 4.0, 100, true, 3), two_level_mc(same, f, 4.0, 100, true, 3));
  // Independent seeds give distinct estimates per point, so the minimum is strictly lower.
  EXPECT_LT(two_level_mc(same, f, 4.0, 100, false, 3), two_level_mc(same, f, 4.0, 100, true, 3));
}

TEST(TwoLevel, SingletonGridIsUnbiased) {
  const std::vector<SimplexPoint> one{{0.2, 0.3, 0.5}};
  const auto b = two_level_bias(one, Gamble::linear({1.0, -2.0, 0.5}), 4.0, 50, true, 400, 4);
  EXPECT_NEAR(b.mean_bias, 0.0, 3.0 * b.standard_error);
  EXPECT_NEAR(b.exact_value, 0.2 - 0.6 + 0.25, 1e-15);
}

TEST(TwoLevel, SharedSeedReducesEnvelopeBias) {
  const auto T = ConstrainedSimplex::uniform(5, 0.1);
  const auto grid = vertices(T);
  const auto shared = two_level_bias(grid, Gamble::entropy(), 2.0, 256, true, 200, 21);
  const auto indep = two_level_bias(grid, Gamble::entropy(), 2.0, 256, false, 200, 21);
  const double pooled = std::sqrt(shared.standard_error * shared.standard_error +
                                  indep.standard_error * indep.standard_error);
  EXPECT_LT(std::fabs(shared.mean_bias) + 2.0 * pooled, std::fabs(indep.mean_bias));
  const auto threaded = two_level_bias(grid, Gamble::entropy(), 2.0, 256, true, 200, 21, 3);
  EXPECT_EQ(threaded.mean_bias, shared.mean_bias);
}

TEST(Consistency, MeanErrorDecreases) {
  const auto T = ConstrainedSimplex::uniform(5, 0.1);
  ConsistencySettings s;
  s.sample_sizes = {16, 64, 256, 1024, 4096};
  s.replications = 100;
  s.seed = 3;
  const auto table = finite_T_consistency(Gamble::entropy(), 2.0, vertices(T), s);
  ASSERT_EQ(table.rows.size(), 5U);
  EXPECT_LE(table.inversions, 1U);
  EXPECT_TRUE(table.decreasing);
}

TEST(Consistency, LargeSampleProxy) {
  const std::vector<SimplexPoint> grid{{0.3, 0.7}, {0.4, 0.6}};
  ConsistencySettings s;
  s.sample_sizes = {100000};
  s.replications = 5;
  s.seed = 4;
  const auto table = finite_T_consistency(Gamble::entropy(), 10.0, grid, s);
  EXPECT_LT(table.rows[0].mean_abs_error, 0.01);
  EXPECT_NEAR(table.exact_value, 3553.0 / 6300.0, 1e-13);
}

TEST(Consistency, SingletonFollowsPlainMonteCarloRate) {
  // E|mean - mu| = sigma sqrt(2 / pi) / sqrt(n) under the normal approximation.
  const std::vector<double> t{0.2, 0.3, 0.5};
  const std::vector<double> c{1.0, -2.0, 0.5};
  const double s = 4.0;
  double mean = 0.0;
  for (std::size_t j = 0; j < 3; ++j) mean += c[j] * t[j];
  double second = 0.0;
  for (std::size_t j = 0; j < 3; ++j) second += c[j] * c[j] * t[j];
  const double sigma = std::sqrt((second - mean * mean) / (s + 1.0));

  ConsistencySettings cs;
  cs.sample_sizes = {16, 256, 4096};
  cs.replications = 400;
  cs.seed = 6;
  const auto table = finite_T_consistency(Gamble::linear(c), s, std::vector<SimplexPoint>{t}, cs);
  for (const auto& row : table.rows) {
    const double predicted = sigma * std::sqrt(2.0 / M_PI) / std::sqrt(static_cast<double>(row.sample_size));
    EXPECT_GT(row.mean_abs_error / predicted, 1.0 / 1.5) << row.sample_size;
    EXPECT_LT(row.mean_abs_error / predicted, 1.5) << row.sample_size;
  }
}

}  // namespace
}  // namespace lowprev
