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

#include <cmath>
#include <random>

#include "curator/signature_matcher.hpp"

namespace {

curator::Matrix unit_rows(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  curator::Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double norm = 0.0;
    for (auto& x : m.row(r)) {
      x = n(rng);
      norm += x * x;
    }
    for (auto& x : m.row(r)) x /= std::sqrt(norm);
  }
  return m;
}

// Sound-class count against a visual vocabulary of 1000 labels.
void BM_AffinityMatrix(benchmark::State& state) {
  const auto sound = unit_rows(static_cast<std::size_t>(state.range(0)), 300, 1);
  const auto visual = unit_rows(1000, 300, 2);
  for (auto _ : state) benchmark::DoNotOptimize(curator::affinity_matrix(sound, visual));
}
BENCHMARK(BM_AffinityMatrix)->Arg(60)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_TopKSignature(benchmark::State& state) {
  curator::AffinityMatrix a;
  a.values = curator::affinity_matrix(unit_rows(1, 300, 3), unit_rows(1000, 300, 4));
  a.sound_labels = {"s"};
  for (int j = 0; j < 1000; ++j) a.visual_labels.push_back("v" + std::to_string(j));
  for (auto _ : state) benchmark::DoNotOptimize(curator::top_k_signature(a, "s", 3));
}
BENCHMARK(BM_TopKSignature);

}  // namespace
