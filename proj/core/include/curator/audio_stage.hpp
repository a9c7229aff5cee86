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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curator/corpus.hpp"

namespace curator {

/// Independent speech/music/other detector confidences for one clip.
struct AudioGateScores {
  std::string clip_id;
  double speech = 0.0;
  double music = 0.0;
  double other = 0.0;  // recorded, never gated on

  friend bool operator==(const AudioGateScores&, const AudioGateScores&) = default;
};

struct RejectionPolicy {
  std::string class_id;
  bool reject_speech = true;
  bool reject_music = true;
  double threshold = 0.5;

  void validate() const;
};

/// Speech is always rejected; music only when the class does not allow it.
RejectionPolicy default_policy(const SoundClass& cls, double threshold = 0.5);

enum class RejectReason { none, speech, music };

std::string_view to_string(RejectReason reason);

struct GateVerdict {
  bool accepted = true;
  RejectReason reason = RejectReason::none;

  friend bool operator==(const GateVerdict&, const GateVerdict&) = default;
};

/// Rejects when a gated score is strictly above the policy threshold; speech
/// is checked before music.
GateVerdict verify_clip(const AudioGateScores& scores, const RejectionPolicy& policy);

enum class MissingScores { keep, drop };

struct AudioStageConfig {
  double threshold = 0.5;
  std::size_t min_clips = 200;
  std::size_t min_videos = 100;
  MissingScores on_missing = MissingScores::drop;
};

struct AudioStageResult {
  std::vector<ClipRecord> clips;
  StageReport report;
  std::vector<std::string> missing_scores;  // clip ids without a score record
  std::map<std::string, RejectReason> rejected;
  std::vector<std::string> warnings;
};

/// Gates every clip, drops classes left with fewer than min_clips clips or
/// min_videos videos, and reports stage 3. `policies` overrides the default
/// policy per class id. Survivors gain audio_pass; their classes move to
/// audio_verified.
AudioStageResult run_audio_stage(std::span<SoundClass> classes, std::span<const ClipRecord> clips,
                                 std::span<const AudioGateScores> scores,
                                 const std::map<std::string, RejectionPolicy>& policies,
                                 const AudioStageConfig& cfg = {});

std::vector<AudioGateScores> load_gate_scores(const std::filesystem::path& path);
void save_gate_scores(const std::filesystem::path& path, std::span<const AudioGateScores> scores);

/// JSON lines {"class_id", "reject_speech", "reject_music", "threshold"?}.
std::map<std::string, RejectionPolicy> load_policies(const std::filesystem::path& path,
                                                     double default_threshold = 0.5);

/// Removes classes with fewer than `min_clips` clips (marking them dropped)
/// and returns the surviving clips.
std::vector<ClipRecord> drop_small_classes(std::span<SoundClass> classes,
                                           std::span<const ClipRecord> clips,
                                           std::size_t min_clips);

}  // namespace curator
