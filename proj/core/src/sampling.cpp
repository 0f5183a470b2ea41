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

#include "lowprev/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

#include "lowprev/error.hpp"

namespace lowprev {

namespace {

void check_rows(std::span<const double> points, std::size_t dimension) {
  const std::size_t n = points.size() / dimension;
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < dimension; ++j) {
      const double v = points[i * dimension + j];
      if (!(v >= 0.0)) throw_domain_error("sample row " + std::to_string(i) + " has a negative coordinate");
      total += v;
    }
    // Rows come out of a log-sum-exp normalisation, so rounding error scales with k.
    if (std::fabs(total - 1.0) > kSimplexTolerance * static_cast<double>(dimension)) {
      throw_domain_error("sample row " + std::to_string(i) + " is not on the simplex");
    }
  }
}

}  // namespace

SampleBatch::SampleBatch(DirichletParams source, std::uint64_t seed, std::size_t dimension,
                         std::vector<double> points, std::vector<double> log_points)
    : source_(std::move(source)),
      seed_(seed),
      dimension_(dimension),
      size_(points.size() / dimension),
      points_(std::move(points)),
      log_points_(std::move(log_points)) {}

SampleBatch SampleBatch::from_log_points(DirichletParams source, std::uint64_t seed, std::size_t dimension,
                                         std::vector<double> log_points) {
  if (dimension == 0 || log_points.empty() || log_points.size() % dimension != 0) {
    throw_domain_error("sample batch needs at least one complete row");
  }
  if (source.mean.size() != dimension) throw_domain_error("sample batch dimension differs from its source");
  std::vector<double> points(log_points.size());
  for (std::size_t i = 0; i < log_points.size(); ++i) {
    if (!(log_points[i] <= 0.0) || std::isnan(log_points[i])) {
      throw_domain_error("log coordinates must be finite and <= 0");
    }
    points[i] = std::exp(log_points[i]);
  }
  check_rows(points, dimension);
  return SampleBatch(std::move(source), seed, dimension, std::move(points), std::move(log_points));
}

SampleBatch SampleBatch::from_points(DirichletParams source, std::uint64_t seed, std::size_t dimension,
                                     std::vector<double> points) {
  if (dimension == 0 || points.empty() || points.size() % dimension != 0) {
    throw_domain_error("sample batch needs at least one complete row");
  }
  if (source.mean.size() != dimension) throw_domain_error("sample batch dimension differs from its source");
  check_rows(points, dimension);
  std::vector<double> log_points(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i] > 0.0)) throw_domain_error("sample coordinates must be strictly positive");
    log_points[i] = std::log(points[i]);
  }
  return SampleBatch(std::move(source), seed, dimension, std::move(points), std::move(log_points));
}

double sample_log_gamma(double shape, Xoshiro256& rng, Xoshiro256& boost_rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw_domain_error("gamma shape must be positive");
  const double a = shape < 1.0 ? shape + 1.0 : shape;
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  double log_draw = 0.0;
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      log_draw = std::log(d) + std::log(v);
      break;
    }
  }
  if (shape < 1.0) log_draw += std::log(boost_rng.uniform()) / shape;
  if (!std::isfinite(log_draw)) throw_numerical_error("gamma variate is degenerate");
  return log_draw;
}

SampleBatch sample_dirichlet(const DirichletParams& q, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw_domain_error("sample size must be at least 1");
  const DirichletParams source = make_dirichlet(q.concentration, q.mean);
  const std::size_t k = source.mean.size();

  std::vector<Xoshiro256> gamma_rngs;
  std::vector<Xoshiro256> boost_rngs;
  std::vector<double> shapes(k);
  gamma_rngs.reserve(k);
  boost_rngs.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    gamma_rngs.emplace_back(substream_seed(seed, 2 * j));
    boost_rngs.emplace_back(substream_seed(seed, 2 * j + 1));
    shapes[j] = source.concentration * source.mean[j];
  }

  std::vector<double> log_points(n * k);
  std::vector<double> points(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = log_points.data() + i * k;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      row[j] = sample_log_gamma(shapes[j], gamma_rngs[j], boost_rngs[j]);
      top = std::max(top, row[j]);
    }
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) total += std::exp(row[j] - top);
    const double log_norm = top + std::log(total);
    for (std::size_t j = 0; j < k; ++j) {
      row[j] -= log_norm;
      // A rounding residue can leave a single dominant coordinate marginally above 0.
      row[j] = std::min(row[j], 0.0);
      points[i * k + j] = std::exp(row[j]);
    }
  }
  check_rows(points, k);
  return SampleBatch(source, seed, k, std::move(points), std::move(log_points));
}

std::vector<double> evaluate_gamble(const Gamble& gamble, const SampleBatch& batch) {
  std::vector<double> values(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) values[i] = gamble(batch.point(i));
  return values;
}

void write_batch_csv(const SampleBatch& batch, std::ostream& out) {
  char buffer[64];
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto row = batch.point(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out << ',';
      const auto result = std::to_chars(buffer, buffer + sizeof(buffer), row[j]);
      out.write(buffer, result.ptr - buffer);
    }
    out << '\n';
  }
}

SampleBatch read_batch_csv(std::istream& in, DirichletParams source, std::uint64_t seed) {
  std::vector<double> points;
  std::size_t dimension = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t count = 0;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      double value = 0.0;
      const auto result = std::from_chars(field.data(), field.data() + field.size(), value);
      if (result.ec != std::errc{}) throw_domain_error("batch CSV: cannot parse '" + field + "'");
      points.push_back(value);
      ++count;
    }
    if (dimension == 0) dimension = count;
    if (count != dimension) throw_domain_error("batch CSV: ragged rows");
  }
  return SampleBatch::from_points(std::move(source), seed, dimension, std::move(points));
}

}  // namespace lowprev
