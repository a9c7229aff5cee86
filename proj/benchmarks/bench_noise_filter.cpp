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

#include "curator/classifier.hpp"
#include "curator/noise_filter.hpp"

namespace {

struct Corpus {
  std::vector<curator::ClipRecord> clips;
  curator::FeatureMap features;
};

Corpus planted(std::size_t classes, std::size_t videos) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  Corpus c;
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t v = 0; v < videos; ++v) {
      const auto video = "k" + std::to_string(k) + "v" + std::to_string(v);
      for (double start : {0.0, 20.0}) {
        auto clip = curator::make_clip(video, "k" + std::to_string(k), static_cast<std::int64_t>(start * 1000), start + 5.0);
        std::vector<double> f(16);
        for (auto& x : f) x = n(rng);
        f[k % f.size()] += 2.0;
        c.features[clip.clip_id] = f;
        c.clips.push_back(clip);
      }
    }
  }
  return c;
}

void BM_EnsembleFilter(benchmark::State& state) {
  const auto c = planted(static_cast<std::size_t>(state.range(0)), 60);
  curator::TrainConfig tc;
  tc.learning_rate = 1e-2;
  const curator::SoftmaxTrainer trainer(tc);
  for (auto _ : state) {
    benchmark::DoNotOptimize(curator::two_split_ensemble_filter(c.clips, c.features, trainer, 7));
  }
  state.counters["clips"] = static_cast<double>(c.clips.size());
}
BENCHMARK(BM_EnsembleFilter)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_Deduplicate(benchmark::State& state) {
  const auto c = planted(10, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(curator::deduplicate(c.clips, c.features));
  state.counters["clips"] = static_cast<double>(c.clips.size());
}
BENCHMARK(BM_Deduplicate)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
