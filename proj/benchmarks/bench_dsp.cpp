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
#include <numbers>

#include "curator/dsp.hpp"

namespace {

curator::dsp::AudioBuffer tone(double seconds) {
  curator::dsp::AudioBuffer b;
  b.samples.resize(static_cast<std::size_t>(seconds * b.sample_rate));
  for (std::size_t i = 0; i < b.samples.size(); ++i) {
    b.samples[i] = 0.5 * std::sin(2.0 * std::numbers::pi * 440.0 * static_cast<double>(i) / b.sample_rate);
  }
  return b;
}

void BM_Spectrogram(benchmark::State& state) {
  const auto buffer = tone(static_cast<double>(state.range(0)));
  curator::dsp::StftOptions options;
  options.target_frames = static_cast<std::size_t>(state.range(0)) * 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(curator::dsp::stft_spectrogram(buffer, options));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(buffer.samples.size()));
}
BENCHMARK(BM_Spectrogram)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
