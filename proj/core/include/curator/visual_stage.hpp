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
#include <span>
#include <string>
#include <vector>

#include "curator/corpus.hpp"
#include "curator/signature_matcher.hpp"

namespace curator {

/// Image-classifier confidences for one decoded frame.
struct FrameScore {
  std::string video_id;
  double time = 0.0;
  std::map<std::string, double> scores;  // visual label -> confidence in [0, 1]

  friend bool operator==(const FrameScore&, const FrameScore&) = default;
};

struct VisualGateConfig {
  double confidence_threshold = 0.2;  // a frame must score strictly above this
  std::size_t frames_per_video = 10;
  double clip_half_width = 5.0;  // seconds on each side of the anchor
  std::size_t max_clips_per_video = 2;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct AnchorFrame {
  double time = 0.0;
  double score = 0.0;

  friend bool operator==(const AnchorFrame&, const AnchorFrame&) = default;
};

class VideoTooShort : public CuratorError {
 public:
  using CuratorError::CuratorError;
};

/// Max confidence over the signature's labels; 0 when none are present.
double signature_score(const FrameScore& frame, std::span<const std::string> signature);

/// Frames whose signature score is above the threshold, best first (ties by
/// earlier time), at most frames_per_video of them. All frames must come from
/// one video.
std::vector<AnchorFrame> select_anchor_frames(std::span<const FrameScore> frames,
                                              std::span<const std::string> signature,
                                              const VisualGateConfig& cfg = {});

/// Carves fixed-width windows around anchors. Windows crossing a video edge
/// are shifted inside it. Overlapping windows are suppressed greedily by
/// anchor score, and at most max_clips_per_video clips are kept.
std::vector<ClipRecord> carve_clips(std::span<const AnchorFrame> anchors, const VideoRecord& video,
                                    const VisualGateConfig& cfg = {});

struct VisualStageResult {
  std::vector<ClipRecord> clips;  // ordered by video_id, then start
  StageReport report;
  std::vector<std::string> warnings;
};

/// Runs the gate over every video of a live class and reports stage 2.
/// Per-video problems are logged to `warnings` and the video is skipped.
/// Surviving classes move to visually_verified; the rest are dropped.
VisualStageResult run_visual_stage(std::span<SoundClass> classes,
                                   std::span<const VideoRecord> videos,
                                   std::span<const FrameScore> frame_scores,
                                   const SignatureMap& signatures, const VisualGateConfig& cfg = {},
                                   std::size_t min_videos = 100);

std::vector<FrameScore> load_frame_scores(const std::filesystem::path& path);
void save_frame_scores(const std::filesystem::path& path, std::span<const FrameScore> frames);

}  // namespace curator
