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

#include <vector>

#include <benchmark/benchmark.h>

#include "lowprev/envelope.hpp"
#include "lowprev/estimator.hpp"
#include "lowprev/model.hpp"
#include "lowprev/sampling.hpp"

namespace {

using namespace lowprev;

const ConstrainedSimplex kT = ConstrainedSimplex::uniform(5, 0.1);
const Gamble kF = Gamble::linear({1, 2, 5, 4, -3});
const DirichletParams kQ = make_dirichlet(2.0, std::vector<double>(5, 0.2));

void BM_SampleDirichlet(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_dirichlet(kQ, n, ++seed));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleDirichlet)->Arg(128)->Arg(1024)->Arg(16384);

void BM_SelfNormalisedEstimate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto batch = sample_dirichlet(kQ, n, 1);
  const auto values = evaluate_gamble(kF, batch);
  const auto t = kT.barycenter();
  for (auto _ : state) {
    const auto logw = log_unnormalised_weights(2.0, t, batch);
    benchmark::DoNotOptimize(self_normalised_estimate(logw, values));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SelfNormalisedEstimate)->Arg(128)->Arg(1024)->Arg(16384);

void BM_EnvelopeArgmin(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto batch = sample_dirichlet(kQ, n, 2);
  const OptimizerConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(envelope_argmin(batch, kF, 2.0, kT, cfg));
}
BENCHMARK(BM_EnvelopeArgmin)->Arg(128)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
