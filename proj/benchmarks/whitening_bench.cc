/* Copyright 2026 The wcnorm Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Cholesky against ZCA whitening across channel counts at a fixed batch.

#include <random>

#include <benchmark/benchmark.h>

#include "wcnorm/linalg.hpp"
#include "wcnorm/normstats.hpp"
#include "wcnorm/wclayers.hpp"

namespace wcnorm {
namespace {

constexpr std::size_t kBatch = 1024;

Mat gaussian(std::size_t d, std::size_t m) {
  std::mt19937_64 rng(d);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat x(d, m);
  for (double& v : x.values()) v = normal(rng);
  return x;
}

void BM_CholeskyWhitenForward(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  const Mat x = gaussian(d, kBatch);
  for (auto _ : state) {
    const BatchStats bs = compute_batch_stats(x, kDefaultShrinkage);
    benchmark::DoNotOptimize(whiten(x, bs));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CholeskyWhitenForward)->RangeMultiplier(2)->Range(8, 256)->Complexity();

void BM_CholeskyWhitenForwardBackward(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  const Mat x = gaussian(d, kBatch);
  const LayerConfig cfg = LayerConfig::named("W-only", d);
  const ColoringParams params = init_params(cfg, 0);
  const Mat y_bar(d, kBatch, 1.0);
  for (auto _ : state) {
    RunningStats rs = RunningStats::initial(d);
    LayerOutput out = wc_forward(x, {}, params, cfg, ForwardMode::train, rs);
    benchmark::DoNotOptimize(wc_backward(y_bar, out.cache, params));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CholeskyWhitenForwardBackward)->RangeMultiplier(2)->Range(8, 256)->Complexity();

void BM_ZcaWhitenForward(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  const Mat x = gaussian(d, kBatch);
  for (auto _ : state) {
    const Vec mu = row_means(x);
    const Mat sigma = shrink(empirical_covariance(x, mu), kDefaultShrinkage);
    benchmark::DoNotOptimize(matmul(zca_whitening_matrix(sigma), center_rows(x, mu)));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ZcaWhitenForward)->RangeMultiplier(2)->Range(8, 128)->Complexity();

}  // namespace
}  // namespace wcnorm

BENCHMARK_MAIN();
