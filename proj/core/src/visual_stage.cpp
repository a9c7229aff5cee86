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

#include "curator/visual_stage.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "json_util.hpp"

namespace curator {

void VisualGateConfig::validate() const {
  if (!(confidence_threshold > 0.0 && confidence_threshold < 1.0)) {
    throw InvalidArgument("visual confidence threshold must be in (0, 1)");
  }
  if (frames_per_video < 1) throw InvalidArgument("frames_per_video must be >= 1");
  if (!(clip_half_width > 0.0)) throw InvalidArgument("clip_half_width must be > 0");
  if (max_clips_per_video < 1) throw InvalidArgument("max_clips_per_video must be >= 1");
}

double signature_score(const FrameScore& frame, std::span<const std::string> signature) {
  double best = 0.0;
  for (const auto& label : signature) {
    auto it = frame.scores.find(label);
    if (it != frame.scores.end()) best = std::max(best, it->second);
  }
  return best;
}

std::vector<AnchorFrame> select_anchor_frames(std::span<const FrameScore> frames,
                                              std::span<const std::string> signature,
                                              const VisualGateConfig& cfg) {
  std::vector<AnchorFrame> out;
  if (frames.empty()) return out;
  const auto& video_id = frames.front().video_id;
  for (const auto& f : frames) {
    if (f.video_id != video_id) {
      throw InvalidArgument("select_anchor_frames: frames from several videos");
    }
    const double s = signature_score(f, signature);
    if (s > cfg.confidence_threshold) out.push_back({f.time, s});
  }
  std::sort(out.begin(), out.end(), [](const AnchorFrame& a, const AnchorFrame& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.time < b.time;
  });
  if (out.size() > cfg.frames_per_video) out.resize(cfg.frames_per_video);
  return out;
}

std::vector<ClipRecord> carve_clips(std::span<const AnchorFrame> anchors, const VideoRecord& video,
                                    const VisualGateConfig& cfg) {
  const auto half_ms = static_cast<std::int64_t>(std::llround(cfg.clip_half_width * 1000.0));
  const auto width_ms = 2 * half_ms;
  const auto duration_ms = static_cast<std::int64_t>(std::floor(video.duration * 1000.0 + 1e-6));
  if (duration_ms < width_ms) {
    throw VideoTooShort("video '" + video.video_id + "' is shorter than one clip");
  }

  std::vector<AnchorFrame> ordered(anchors.begin(), anchors.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const AnchorFrame& a, const AnchorFrame& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.time < b.time;
  });

  std::vector<std::int64_t> starts;
  std::vector<ClipRecord> clips;
  for (const auto& a : ordered) {
    if (clips.size() >= cfg.max_clips_per_video) break;
    const auto anchor_ms = static_cast<std::int64_t>(std::llround(a.time * 1000.0));
    const auto start = std::clamp<std::int64_t>(anchor_ms - half_ms, 0, duration_ms - width_ms);
    const bool overlaps = std::any_of(starts.begin(), starts.end(), [&](std::int64_t s) {
      return std::min(s, start) + width_ms > std::max(s, start);
    });
    if (overlaps) continue;
    starts.push_back(start);
    auto clip = make_clip(video.video_id, video.class_id, start, a.time);
    clip.end = static_cast<double>(start + width_ms) / 1000.0;
    clip.provenance.add(Provenance::visual_pass);
    clips.push_back(std::move(clip));
  }
  return clips;
}

VisualStageResult run_visual_stage(std::span<SoundClass> classes,
                                   std::span<const VideoRecord> videos,
                                   std::span<const FrameScore> frame_scores,
                                   const SignatureMap& signatures, const VisualGateConfig& cfg,
                                   std::size_t min_videos) {
  cfg.validate();
  VisualStageResult result;

  std::unordered_map<std::string, const SoundClass*> class_by_id;
  for (const auto& c : classes) class_by_id[c.id] = &c;

  std::unordered_map<std::string, std::vector<FrameScore>> frames_by_video;
  for (const auto& f : frame_scores) frames_by_video[f.video_id].push_back(f);

  std::vector<const VideoRecord*> ordered;
  ordered.reserve(videos.size());
  for (const auto& v : videos) ordered.push_back(&v);
  std::sort(ordered.begin(), ordered.end(),
            [](const VideoRecord* a, const VideoRecord* b) { return a->video_id < b->video_id; });

  for (const VideoRecord* video : ordered) {
    auto cls = class_by_id.find(video->class_id);
    if (cls == class_by_id.end() || cls->second->status == ClassStatus::dropped) continue;
    auto sig = signatures.find(video->class_id);
    if (sig == signatures.end()) {
      result.warnings.push_back("video '" + video->video_id + "': class '" + video->class_id +
                                "' has no visual signature");
      continue;
    }
    auto fit = frames_by_video.find(video->video_id);
    if (fit == frames_by_video.end()) continue;

    std::vector<FrameScore> frames;
    for (auto& f : fit->second) {
      if (f.time < 0.0 || f.time > video->duration) {
        result.warnings.push_back("video '" + video->video_id + "': frame at " +
                                  std::to_string(f.time) + " s lies outside the video");
        continue;
      }
      frames.push_back(f);
    }
    try {
      const auto anchors = select_anchor_frames(frames, sig->second, cfg);
      if (anchors.empty()) continue;
      auto clips = carve_clips(anchors, *video, cfg);
      std::sort(clips.begin(), clips.end(),
                [](const ClipRecord& a, const ClipRecord& b) { return a.start < b.start; });
      for (auto& c : clips) result.clips.push_back(std::move(c));
    } catch (const CuratorError& e) {
      result.warnings.push_back("video '" + video->video_id + "' skipped: " + e.what());
    }
  }

  result.report = stage_report(classes, videos, result.clips, 2, min_videos);
  for (auto& c : classes) {
    if (c.status != ClassStatus::dropped) advance_status(c, ClassStatus::visually_verified);
  }
  result.clips = clips_of_live_classes(result.clips, classes);
  return result;
}

std::vector<FrameScore> load_frame_scores(const std::filesystem::path& path) {
  std::vector<FrameScore> out;
  detail::read_jsonl(path, [&](const detail::json& j, std::size_t) {
    FrameScore f;
    f.video_id = detail::field<std::string>(j, "video_id");
    f.time = detail::field<double>(j, "time");
    f.scores = detail::field<std::map<std::string, double>>(j, "scores");
    if (f.time < 0.0) throw detail::FieldError("negative frame time");
    for (const auto& [label, p] : f.scores) {
      if (!(p >= 0.0 && p <= 1.0)) throw detail::FieldError("confidence for '" + label + "' outside [0, 1]");
    }
    out.push_back(std::move(f));
  });
  return out;
}

void save_frame_scores(const std::filesystem::path& path, std::span<const FrameScore> frames) {
  detail::save_records(path, frames, [](const FrameScore& f) {
    return detail::json{{"video_id", f.video_id}, {"time", f.time}, {"scores", f.scores}};
  });
}

}  // namespace curator
