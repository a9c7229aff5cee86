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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "curator/errors.hpp"

namespace curator {

/// Width of every dataset clip, in seconds.
inline constexpr double kClipSeconds = 10.0;
/// Tolerance on clip width, in seconds.
inline constexpr double kClipWidthTolerance = 1e-3;
/// A single class may take at most this many clips from one source video.
inline constexpr std::size_t kMaxClipsPerVideo = 2;

enum class ClassGroup { people, animals, music, sports, nature, vehicle, home, tools, others };

enum class ClassStatus { candidate, visually_verified, audio_verified, retained, dropped };

enum class Split { unassigned, train, val, test };

enum class Provenance : std::uint8_t {
  visual_pass = 1U << 0U,
  audio_pass = 1U << 1U,
  review_pass = 1U << 2U,
  ensemble_easy = 1U << 3U,
  mined_hard = 1U << 4U,
  final_retrieved = 1U << 5U,
};

std::string_view to_string(ClassGroup group);
std::string_view to_string(ClassStatus status);
std::string_view to_string(Split split);
std::string_view to_string(Provenance flag);

ClassGroup parse_group(std::string_view text);
ClassStatus parse_status(std::string_view text);
Split parse_split(std::string_view text);
Provenance parse_provenance(std::string_view text);

/// Small bitset over Provenance flags.
class ProvenanceSet {
 public:
  ProvenanceSet() = default;
  ProvenanceSet(std::initializer_list<Provenance> flags) {
    for (auto f : flags) add(f);
  }

  void add(Provenance flag) noexcept { bits_ |= static_cast<std::uint8_t>(flag); }
  void remove(Provenance flag) noexcept { bits_ &= static_cast<std::uint8_t>(~static_cast<std::uint8_t>(flag)); }
  [[nodiscard]] bool has(Provenance flag) const noexcept { return (bits_ & static_cast<std::uint8_t>(flag)) != 0; }
  [[nodiscard]] bool empty() const noexcept { return bits_ == 0; }
  [[nodiscard]] std::uint8_t bits() const noexcept { return bits_; }
  /// Flags in declaration order.
  [[nodiscard]] std::vector<Provenance> flags() const;

  friend bool operator==(const ProvenanceSet&, const ProvenanceSet&) = default;

 private:
  std::uint8_t bits_ = 0;
};

struct SoundClass {
  std::string id;
  std::string display_label;
  ClassGroup group = ClassGroup::others;
  ClassStatus status = ClassStatus::candidate;
  bool music_allowed = false;
  std::vector<std::string> visual_signature;

  friend bool operator==(const SoundClass&, const SoundClass&) = default;
};

/// True when `from -> to` follows the lifecycle candidate -> visually_verified ->
/// audio_verified -> retained, or moves to dropped from a live state.
bool can_transition(ClassStatus from, ClassStatus to) noexcept;

/// Moves `cls` to `to`; throws InvalidArgument on a backward transition.
void advance_status(SoundClass& cls, ClassStatus to);

struct VideoRecord {
  std::string video_id;
  double duration = 0.0;
  std::string class_id;
  std::string query_used;

  friend bool operator==(const VideoRecord&, const VideoRecord&) = default;
};

struct ClipRecord {
  std::string clip_id;
  std::string video_id;
  std::string class_id;
  double start = 0.0;
  double end = 0.0;
  double anchor_frame_time = 0.0;
  ProvenanceSet provenance;
  Split split = Split::unassigned;

  friend bool operator==(const ClipRecord&, const ClipRecord&) = default;
};

/// "{video_id}:{start_ms}", with start rounded to the nearest millisecond.
std::string make_clip_id(std::string_view video_id, double start_seconds);

/// Builds a clip of kClipSeconds starting at `start_ms`.
ClipRecord make_clip(std::string video_id, std::string class_id, std::int64_t start_ms,
                     double anchor_time);

/// Per-class score vector produced by an external model or the baseline classifier.
struct ScoreRecord {
  std::string clip_id;
  std::map<std::string, double> scores;

  friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

struct StageReport {
  int stage = 0;
  std::size_t classes_remaining = 0;
  std::size_t videos_remaining = 0;
  std::size_t clips_remaining = 0;

  friend bool operator==(const StageReport&, const StageReport&) = default;
};

/// Corpus-wide survival thresholds. Both apply at stage boundaries; the
/// video threshold at every boundary, the clip threshold from stage 3 on.
struct CorpusThresholds {
  std::size_t min_videos = 100;
  std::size_t min_clips = 200;
};

/// Snapshot of survivors after `stage` (1..4).
///
/// Classes with fewer than `min_videos` videos are marked dropped before
/// counting. At stage 1 videos are counted from `videos`; from stage 2 on a
/// video counts only if at least one clip of its class survives. Only clips
/// and videos of non-dropped classes are counted.
StageReport stage_report(std::span<SoundClass> classes, std::span<const VideoRecord> videos,
                         std::span<const ClipRecord> clips, int stage, std::size_t min_videos = 100);

/// True when class and video counts never increase along `reports`.
bool is_monotone_cascade(std::span<const StageReport> reports) noexcept;

struct ManifestDiff {
  std::vector<ClipRecord> kept;
  std::vector<ClipRecord> removed;
};

/// Partitions `before` by clip_id membership in `after`, preserving order.
ManifestDiff diff_manifests(std::span<const ClipRecord> before, std::span<const ClipRecord> after);

/// Keeps only clips whose class is not dropped.
std::vector<ClipRecord> clips_of_live_classes(std::span<const ClipRecord> clips,
                                              std::span<const SoundClass> classes);

/// Checks that every clip lies within its source video.
void validate_clip_bounds(std::span<const ClipRecord> clips, std::span<const VideoRecord> videos);

// Newline-delimited JSON manifests. Loaders validate each record and reject
// duplicate primary ids, reporting the offending line.

enum class ManifestKind { classes, videos, clips, scores };

std::vector<SoundClass> load_classes(const std::filesystem::path& path);
std::vector<VideoRecord> load_videos(const std::filesystem::path& path);
std::vector<ClipRecord> load_clips(const std::filesystem::path& path);
std::vector<ScoreRecord> load_scores(const std::filesystem::path& path);

void save_classes(const std::filesystem::path& path, std::span<const SoundClass> classes);
void save_videos(const std::filesystem::path& path, std::span<const VideoRecord> videos);
void save_clips(const std::filesystem::path& path, std::span<const ClipRecord> clips);
void save_scores(const std::filesystem::path& path, std::span<const ScoreRecord> scores);

/// Number of records in a manifest of the given kind (validates every record).
std::size_t count_manifest(const std::filesystem::path& path, ManifestKind kind);

void save_stage_report(const std::filesystem::path& path, const StageReport& report);
StageReport load_stage_report(const std::filesystem::path& path);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace curator
