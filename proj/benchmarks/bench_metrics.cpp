/*
 * Copyright 2026 The Curator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "curator/metrics.hpp"

namespace {

struct Ranked {
  std::vector<double> scores;
  std::vector<int> labels;
};

Ranked random_ranked(std::size_t n) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u;
  Ranked r;
  for (std::size_t i = 0; i < n; ++i) {
    r.scores.push_back(u(rng));
    r.labels.push_back(i % 7 == 0 ? 1 : 0);
  }
  return r;
}

void BM_AveragePrecision(benchmark::State& state) {
  const auto r = random_ranked(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(curator::metrics::average_precision(r.scores, r.labels));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AveragePrecision)->RangeMultiplier(8)->Range(64, 1 << 18)->Complexity(benchmark::oNLogN);

void BM_RocAuc(benchmark::State& state) {
  const auto r = random_ranked(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(curator::metrics::roc_auc(r.scores, r.labels));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RocAuc)->RangeMultiplier(8)->Range(64, 1 << 18)->Complexity(benchmark::oNLogN);

}  // namespace
