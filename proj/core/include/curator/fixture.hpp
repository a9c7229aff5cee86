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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace curator {

/// Shape of the synthetic corpus. Every class gets `videos_per_class` videos
/// of 60 s, each yielding two visual anchors. Of those videos, `narrated`
/// carry speech or background music and fail the audio gate; of the rest,
/// `noisy` are mislabeled (true labels spread evenly over the other
/// classes), `hard` have audio mixed with a distant class but the class's
/// visual look, and `duplicates` re-upload another video's clips.
struct FixtureSpec {
  std::size_t classes = 10;
  std::size_t videos_per_class = 70;
  std::size_t narrated = 10;
  std::size_t noisy = 18;
  std::size_t hard = 6;
  std::size_t duplicates = 2;
  std::size_t audio_dim = 8;
  std::size_t visual_dim = 16;
  double ring_radius = 6.0;
  double audio_noise = 0.6;
  double visual_noise = 0.08;
  std::uint64_t seed = 1;

  void validate() const;
};

struct FixtureSummary {
  std::filesystem::path config;     // pipeline config inside the fixture directory
  std::size_t stage4_clips = 0;     // clips that reach the noise filter
  double stage4_purity = 0.0;       // fraction of those with a correct label
  std::map<std::string, std::string> truth;  // clip_id -> planted class
};

/// Writes every input manifest of a full pipeline run, plus truth.jsonl and
/// review_oracle.jsonl, into `dir`, and a pipeline.toml that points at them.
/// Output is a pure function of the spec.
FixtureSummary write_fixture(const std::filesystem::path& dir, const FixtureSpec& spec = {});

}  // namespace curator
