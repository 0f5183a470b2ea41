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

#include "lowprev/special.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lowprev/error.hpp"

namespace lowprev {

double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

namespace {

// Continued fraction for I_x(a, b) by the modified Lentz method. Converges quickly
// for x < (a + 1) / (a + b + 2); the caller uses the symmetry relation otherwise.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 200000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw_numerical_error("incomplete beta continued fraction did not converge");
}

double log_beta(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw_domain_error("incomplete beta requires a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw_domain_error("incomplete beta requires x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double t_critical(std::size_t df, double level) {
  if (df == 0) throw_domain_error("t_critical: degrees of freedom must be at least 1");
  if (!(level > 0.0 && level < 1.0)) throw_domain_error("t_critical: level must lie in (0, 1)");

  // With y = c^2 / (df + c^2), P(|T| <= c) = I_y(1/2, df/2). Solve for y.
  const double a = 0.5;
  const double b = 0.5 * static_cast<double>(df);
  auto coverage = [&](double y) { return regularized_incomplete_beta(a, b, y); };

  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 1100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (coverage(mid) < level) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double y = 0.5 * (lo + hi);

  const double log_norm = log_beta(a, b);
  for (int i = 0; i < 3; ++i) {
    const double density = std::exp((a - 1.0) * std::log(y) + (b - 1.0) * std::log1p(-y) - log_norm);
    if (!(density > 0.0) || !std::isfinite(density)) break;
    const double next = y - (coverage(y) - level) / density;
    if (!(next > lo && next < hi)) break;
    y = next;
  }
  return std::sqrt(static_cast<double>(df) * y / (1.0 - y));
}

}  // namespace lowprev
