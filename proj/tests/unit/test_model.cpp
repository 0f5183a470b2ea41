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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "lowprev/error.hpp"
#include "lowprev/model.hpp"
#include "oracles.hpp"

namespace lowprev {
namespace {

const std::vector<double> kCoeffs{1, 2, 5, 4, -3};

// Uniform point on the simplex by normalised exponentials.
std::vector<double> random_simplex(std::mt19937_64& gen, std::size_t k) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(k);
  double total = 0.0;
  for (double& v : x) total += (v = e(gen));
  for (double& v : x) v /= total;
  return x;
}

std::vector<double> random_feasible(std::mt19937_64& gen, const ConstrainedSimplex& T) {
  auto u = random_simplex(gen, T.dimension());
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = T.lower_bounds()[j] + T.slack() * u[j];
  return u;
}

TEST(LinearGamble, Examples) {
  EXPECT_NEAR(eval_linear_gamble(kCoeffs, std::vector<double>{0.1, 0.1, 0.1, 0.1, 0.6}), -0.6, 1e-15);
  EXPECT_EQ(eval_linear_gamble(std::vector<double>(5, 0.0), std::vector<double>{0.3, 0.1, 0.2, 0.2, 0.2}), 0.0);
  EXPECT_NEAR(eval_linear_gamble(kCoeffs, std::vector<double>(5, 0.2)), 1.8, 1e-15);
  EXPECT_THROW(eval_linear_gamble(kCoeffs, std::vector<double>{0.5, 0.5}), Error);
}

TEST(EntropyGamble, Examples) {
  EXPECT_NEAR(eval_entropy_gamble(std::vector<double>{0.5, 0.5}), std::log(2.0), 1e-15);
  EXPECT_EQ(eval_entropy_gamble(std::vector<double>{1.0, 0.0}), 0.0);
  const double oracle = -0.3 * std::log(0.3) - 0.7 * std::log(0.7);
  EXPECT_NEAR(eval_entropy_gamble(std::vector<double>{0.3, 0.7}), oracle, 1e-15);
  EXPECT_NEAR(oracle, 0.610864, 1e-6);
}

TEST(EntropyGamble, BoundedByLogK) {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t k = 2 + static_cast<std::size_t>(i % 6);
    const auto x = random_simplex(gen, k);
    const double h = eval_entropy_gamble(x);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log(static_cast<double>(k)) + 1e-14);
  }
}

TEST(ExactExpectation, Linear) {
  EXPECT_NEAR(exact_expectation_linear(kCoeffs, std::vector<double>{0.1, 0.1, 0.1, 0.1, 0.6}), -0.6, 1e-15);
  EXPECT_NEAR(exact_expectation_linear(kCoeffs, std::vector<double>(5, 0.2)), 1.8, 1e-15);
  for (std::size_t j = 0; j < 5; ++j) {
    std::vector<double> e(5, 0.0);
    e[j] = 1.0;
    EXPECT_EQ(exact_expectation_linear(kCoeffs, e), kCoeffs[j]);
  }
  EXPECT_THROW(exact_expectation_linear(kCoeffs, std::vector<double>{1.0}), Error);
}

TEST(ExactExpectation, EntropyAgainstQuadrature) {
  // k = 2: the first coordinate is Beta(s t1, s t2).
  for (double s : {2.0, 10.0, 37.5}) {
    for (double t1 : {0.3, 0.5, 0.81}) {
      const double expected = oracle::beta_entropy_expectation(s * t1, s * (1.0 - t1));
      EXPECT_NEAR(exact_expectation_entropy(s, std::vector<double>{t1, 1.0 - t1}), expected, 1e-10);
    }
  }
  // Closed form at s = 10, t = (0.3, 0.7) with harmonic numbers.
  EXPECT_NEAR(exact_expectation_entropy(10.0, std::vector<double>{0.3, 0.7}), 3553.0 / 6300.0, 1e-13);
}

TEST(ExactLowerLinear, Examples) {
  const auto T = ConstrainedSimplex::uniform(5, 0.1);
  const auto sol = exact_lower_linear(kCoeffs, T);
  EXPECT_NEAR(sol.value, -0.6, 1e-15);
  const std::vector<double> t_star{0.1, 0.1, 0.1, 0.1, 0.6};
  for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(sol.argmin[j], t_star[j], 1e-15);

  const auto flat = exact_lower_linear(std::vector<double>(5, 2.5), T);
  EXPECT_DOUBLE_EQ(flat.value, 2.5);
  EXPECT_TRUE(T.contains(flat.argmin));

  const ConstrainedSimplex segment({0.3, 0.6});
  const auto seg = exact_lower_linear(std::vector<double>{2, 1}, segment);
  EXPECT_NEAR(seg.value, 1.3, 1e-15);
  EXPECT_NEAR(seg.argmin[0], 0.3, 1e-15);
  EXPECT_NEAR(seg.argmin[1], 0.7, 1e-15);
}

TEST(ExactLowerLinear, MinimalOverRandomFeasiblePoints) {
  std::mt19937_64 gen(5);
  const ConstrainedSimplex T({0.05, 0.1, 0.0, 0.2, 0.15});
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> c(5);
    for (double& v : c) v = coef(gen);
    const double low = exact_lower_linear(c, T).value;
    for (int i = 0; i < 100; ++i) {
      EXPECT_LE(low, exact_expectation_linear(c, random_feasible(gen, T)) + 1e-14);
    }
  }
}

TEST(ConstrainedSimplex, MembershipAndValidation) {
  const ConstrainedSimplex T({0.3, 0.6});
  EXPECT_TRUE(T.contains(std::vector<double>{0.3, 0.7}));
  EXPECT_TRUE(T.contains(std::vector<double>{0.3 - 5e-13, 0.7 + 5e-13}));
  EXPECT_FALSE(T.contains(std::vector<double>{0.29, 0.71}));
  EXPECT_FALSE(T.contains(std::vector<double>{0.35, 0.7}));
  EXPECT_FALSE(T.contains(std::vector<double>{0.3, 0.7, 0.0}));
  EXPECT_NEAR(T.slack(), 0.1, 1e-15);
  EXPECT_FALSE(T.is_singleton());
  EXPECT_TRUE(ConstrainedSimplex({0.4, 0.6}).is_singleton());

  EXPECT_THROW(ConstrainedSimplex({0.5}), Error);
  EXPECT_THROW(ConstrainedSimplex({-0.1, 0.2}), Error);
  EXPECT_THROW(ConstrainedSimplex({0.6, 0.6}), Error);
}

TEST(ConstrainedSimplex, BarycenterAndVertices) {
  const auto T = ConstrainedSimplex::uniform(5, 0.1);
  for (double v : T.barycenter()) EXPECT_NEAR(v, 0.2, 1e-15);
  const auto v4 = T.vertex(4);
  EXPECT_NEAR(v4[4], 0.6, 1e-15);
  EXPECT_TRUE(T.contains(v4));
  EXPECT_THROW(T.vertex(5), Error);
}

TEST(SimplexPoint, RenormalisesOnlyWithinTolerance) {
  const auto p = checked_simplex_point(std::vector<double>{0.5, 0.5 + 1e-13});
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-16);
  EXPECT_THROW(checked_simplex_point(std::vector<double>{0.5, 0.5 + 1e-9}), Error);
  EXPECT_THROW(checked_simplex_point(std::vector<double>{1.1, -0.1}), Error);
}

TEST(DirichletLogpdf, UniformBetaIsZero) {
  const auto p = make_dirichlet(2.0, std::vector<double>{0.5, 0.5});
  EXPECT_NEAR(dirichlet_logpdf(p, std::vector<double>{0.5, 0.5}), 0.0, 1e-15);
}

TEST(DirichletLogpdf, IntegratesToOne) {
  const auto p = make_dirichlet(10.0, std::vector<double>{0.3, 0.7});
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double mass = integrator.integrate(
      [&](double u) {
        if (u <= 0.0 || u >= 1.0) return 0.0;
        return std::exp(dirichlet_logpdf(p, std::vector<double>{u, 1.0 - u}));
      },
      0.0, 1.0);
  EXPECT_NEAR(mass, 1.0, 1e-6);
}

TEST(DirichletLogpdf, DifferenceMatchesLogRatioFormula) {
  // ln p(x) - ln p(y) = sum_j (s t_j - 1) ln(x_j / y_j) for the same parameters.
  std::mt19937_64 gen(3);
  const std::vector<double> t{0.15, 0.25, 0.6};
  const auto p = make_dirichlet(4.0, t);
  for (int i = 0; i < 50; ++i) {
    const auto x = random_simplex(gen, 3);
    const auto y = random_simplex(gen, 3);
    double expected = 0.0;
    for (std::size_t j = 0; j < 3; ++j) expected += (4.0 * t[j] - 1.0) * std::log(x[j] / y[j]);
    EXPECT_NEAR(dirichlet_logpdf(p, x) - dirichlet_logpdf(p, y), expected, 1e-10 * std::max(1.0, std::fabs(expected)));
  }
}

TEST(DirichletLogpdf, MatchesOracleAtRandomInteriorPoints) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> conc(0.5, 50.0);
  for (int i = 0; i < 100; ++i) {
    const std::size_t k = 2 + static_cast<std::size_t>(i % 5);
    auto t = random_simplex(gen, k);
    const double s = conc(gen);
    const auto x = random_simplex(gen, k);
    const double expected = oracle::dirichlet_logpdf(s, t, x);
    EXPECT_NEAR(dirichlet_logpdf(make_dirichlet(s, t), x), expected, 1e-10 * std::max(1.0, std::fabs(expected)));
  }
}

TEST(DirichletLogpdf, Errors) {
  const auto p = make_dirichlet(1.0, std::vector<double>{0.5, 0.5});
  EXPECT_THROW(dirichlet_logpdf(p, std::vector<double>{0.0, 1.0}), Error);
  EXPECT_THROW(dirichlet_logpdf(DirichletParams{0.0, {0.5, 0.5}}, std::vector<double>{0.5, 0.5}), Error);
  EXPECT_THROW(make_dirichlet(-1.0, std::vector<double>{0.5, 0.5}), Error);
}

TEST(Gamble, KindsAndCustom) {
  const auto lin = Gamble::linear(kCoeffs);
  EXPECT_EQ(lin.kind(), Gamble::Kind::linear);
  EXPECT_NEAR(lin(std::vector<double>(5, 0.2)), 1.8, 1e-15);
  const auto h = Gamble::entropy();
  EXPECT_NEAR(h(std::vector<double>{0.5, 0.5}), std::log(2.0), 1e-15);
  const auto sq = Gamble::custom("square", [](std::span<const double> x) { return x[0] * x[0]; });
  EXPECT_DOUBLE_EQ(sq(std::vector<double>{0.5, 0.5}), 0.25);
  const auto bad = Gamble::custom("bad", [](std::span<const double>) { return std::nan(""); });
  EXPECT_THROW(bad(std::vector<double>{0.5, 0.5}), Error);
  EXPECT_THROW(Gamble::linear({}), Error);
}

}  // namespace
}  // namespace lowprev
