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

#include "curator/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json_util.hpp"

namespace curator {

namespace {

constexpr std::array kGroupNames{"people", "animals", "music",   "sports", "nature",
                                 "vehicle", "home",   "tools", "others"};
constexpr std::array kStatusNames{"candidate", "visually_verified", "audio_verified", "retained",
                                  "dropped"};
constexpr std::array kSplitNames{"unassigned", "train", "val", "test"};
constexpr std::array kProvenanceFlags{Provenance::visual_pass,   Provenance::audio_pass,
                                      Provenance::review_pass,   Provenance::ensemble_easy,
                                      Provenance::mined_hard,    Provenance::final_retrieved};
constexpr std::array kProvenanceNames{"visual_pass",   "audio_pass", "review_pass",
                                      "ensemble_easy", "mined_hard", "final_retrieved"};

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::array<const char*, N>& names, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (text == names[i]) return static_cast<Enum>(i);
  }
  throw InvalidArgument(std::string("unknown ") + what + " '" + std::string(text) + "'");
}

int status_rank(ClassStatus s) noexcept { return static_cast<int>(s); }

}  // namespace

std::string_view to_string(ClassGroup group) { return kGroupNames[static_cast<std::size_t>(group)]; }
std::string_view to_string(ClassStatus status) {
  return kStatusNames[static_cast<std::size_t>(status)];
}
std::string_view to_string(Split split) { return kSplitNames[static_cast<std::size_t>(split)]; }
std::string_view to_string(Provenance flag) {
  for (std::size_t i = 0; i < kProvenanceFlags.size(); ++i) {
    if (kProvenanceFlags[i] == flag) return kProvenanceNames[i];
  }
  return "unknown";
}

ClassGroup parse_group(std::string_view text) {
  return parse_enum<ClassGroup>(text, kGroupNames, "group");
}
ClassStatus parse_status(std::string_view text) {
  return parse_enum<ClassStatus>(text, kStatusNames, "status");
}
Split parse_split(std::string_view text) { return parse_enum<Split>(text, kSplitNames, "split"); }
Provenance parse_provenance(std::string_view text) {
  for (std::size_t i = 0; i < kProvenanceNames.size(); ++i) {
    if (text == kProvenanceNames[i]) return kProvenanceFlags[i];
  }
  throw InvalidArgument("unknown provenance flag '" + std::string(text) + "'");
}

std::vector<Provenance> ProvenanceSet::flags() const {
  std::vector<Provenance> out;
  for (auto f : kProvenanceFlags) {
    if (has(f)) out.push_back(f);
  }
  return out;
}

bool can_transition(ClassStatus from, ClassStatus to) noexcept {
  if (from == ClassStatus::dropped) return to == ClassStatus::dropped;
  if (to == ClassStatus::dropped) return true;
  return status_rank(to) >= status_rank(from);
}

void advance_status(SoundClass& cls, ClassStatus to) {
  if (!can_transition(cls.status, to)) {
    throw InvalidArgument("class '" + cls.id + "': illegal status transition " +
                          std::string(to_string(cls.status)) + " -> " +
                          std::string(to_string(to)));
  }
  cls.status = to;
}

std::string make_clip_id(std::string_view video_id, double start_seconds) {
  return std::string(video_id) + ":" + std::to_string(std::llround(start_seconds * 1000.0));
}

ClipRecord make_clip(std::string video_id, std::string class_id, std::int64_t start_ms,
                     double anchor_time) {
  ClipRecord clip;
  clip.clip_id = video_id + ":" + std::to_string(start_ms);
  clip.video_id = std::move(video_id);
  clip.class_id = std::move(class_id);
  clip.start = static_cast<double>(start_ms) / 1000.0;
  clip.end = static_cast<double>(start_ms + static_cast<std::int64_t>(kClipSeconds * 1000.0)) / 1000.0;
  clip.anchor_frame_time = anchor_time;
  return clip;
}

StageReport stage_report(std::span<SoundClass> classes, std::span<const VideoRecord> videos,
                         std::span<const ClipRecord> clips, int stage, std::size_t min_videos) {
  if (stage < 1 || stage > 4) {
    throw InvalidArgument("stage must be in 1..4, got " + std::to_string(stage));
  }

  std::unordered_map<std::string, std::set<std::string>> videos_by_class;
  std::unordered_map<std::string, std::size_t> clips_by_class;
  if (stage == 1) {
    for (const auto& v : videos) videos_by_class[v.class_id].insert(v.video_id);
  } else {
    for (const auto& c : clips) {
      videos_by_class[c.class_id].insert(c.video_id);
      ++clips_by_class[c.class_id];
    }
  }

  StageReport report;
  report.stage = stage;
  for (auto& cls : classes) {
    if (cls.status == ClassStatus::dropped) continue;
    auto it = videos_by_class.find(cls.id);
    const std::size_t n_videos = it == videos_by_class.end() ? 0 : it->second.size();
    if (n_videos < min_videos) {
      advance_status(cls, ClassStatus::dropped);
      continue;
    }
    ++report.classes_remaining;
    report.videos_remaining += n_videos;
    if (stage > 1) report.clips_remaining += clips_by_class[cls.id];
  }
  return report;
}

bool is_monotone_cascade(std::span<const StageReport> reports) noexcept {
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].classes_remaining > reports[i - 1].classes_remaining) return false;
    if (reports[i].videos_remaining > reports[i - 1].videos_remaining) return false;
  }
  return true;
}

ManifestDiff diff_manifests(std::span<const ClipRecord> before, std::span<const ClipRecord> after) {
  std::unordered_set<std::string> present;
  present.reserve(after.size());
  for (const auto& c : after) present.insert(c.clip_id);

  ManifestDiff diff;
  for (const auto& c : before) {
    (present.contains(c.clip_id) ? diff.kept : diff.removed).push_back(c);
  }
  return diff;
}

std::vector<ClipRecord> clips_of_live_classes(std::span<const ClipRecord> clips,
                                              std::span<const SoundClass> classes) {
  std::unordered_set<std::string> live;
  for (const auto& cls : classes) {
    if (cls.status != ClassStatus::dropped) live.insert(cls.id);
  }
  std::vector<ClipRecord> out;
  for (const auto& c : clips) {
    if (live.contains(c.class_id)) out.push_back(c);
  }
  return out;
}

void validate_clip_bounds(std::span<const ClipRecord> clips, std::span<const VideoRecord> videos) {
  std::unordered_map<std::string, double> duration;
  for (const auto& v : videos) duration[v.video_id] = v.duration;
  for (const auto& c : clips) {
    auto it = duration.find(c.video_id);
    if (it == duration.end()) {
      throw InvalidArgument("clip '" + c.clip_id + "' references unknown video '" + c.video_id + "'");
    }
    if (c.start < 0.0 || c.end > it->second + kClipWidthTolerance) {
      throw InvalidArgument("clip '" + c.clip_id + "' exceeds its video bounds");
    }
  }
}

// --- JSON codecs -----------------------------------------------------------

namespace detail {

void read_jsonl(const std::filesystem::path& path,
                const std::function<void(const json&, std::size_t)>& on_record) {
  std::ifstream in(path);
  if (!in) throw CuratorError("cannot open manifest '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ManifestError(path.string(), line_no, std::string("malformed JSON: ") + e.what());
    }
    try {
      on_record(record, line_no);
    } catch (const ManifestError&) {
      throw;
    } catch (const FieldError& e) {
      throw ManifestError(path.string(), line_no, e.what());
    } catch (const CuratorError& e) {
      throw ManifestError(path.string(), line_no, e.what());
    }
  }
}

void write_jsonl(const std::filesystem::path& path, std::span<const json> records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CuratorError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw CuratorError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& value) {
  write_file_atomic(path, value.dump(2) + "\n");
}

json to_json(const SoundClass& cls) {
  return json{{"id", cls.id},
              {"display_label", cls.display_label},
              {"group", to_string(cls.group)},
              {"status", to_string(cls.status)},
              {"music_allowed", cls.music_allowed},
              {"visual_signature", cls.visual_signature}};
}

json to_json(const VideoRecord& video) {
  return json{{"video_id", video.video_id},
              {"duration", video.duration},
              {"class_id", video.class_id},
              {"query_used", video.query_used}};
}

json to_json(const ClipRecord& clip) {
  json flags = json::array();
  for (auto f : clip.provenance.flags()) flags.push_back(to_string(f));
  return json{{"clip_id", clip.clip_id},
              {"video_id", clip.video_id},
              {"class_id", clip.class_id},
              {"start", clip.start},
              {"end", clip.end},
              {"anchor_frame_time", clip.anchor_frame_time},
              {"provenance", flags},
              {"split", to_string(clip.split)}};
}

json to_json(const ScoreRecord& record) {
  return json{{"clip_id", record.clip_id}, {"scores", record.scores}};
}

json to_json(const StageReport& report) {
  return json{{"stage", report.stage},
              {"classes_remaining", report.classes_remaining},
              {"videos_remaining", report.videos_remaining},
              {"clips_remaining", report.clips_remaining}};
}

SoundClass sound_class_from_json(const json& j) {
  SoundClass cls;
  cls.id = field<std::string>(j, "id");
  cls.display_label = field<std::string>(j, "display_label");
  if (cls.id.empty()) throw FieldError("empty class id");
  if (cls.display_label.empty()) throw FieldError("empty display_label");
  cls.group = parse_group(field_or<std::string>(j, "group", "others"));
  cls.status = parse_status(field_or<std::string>(j, "status", "candidate"));
  cls.music_allowed = field_or<bool>(j, "music_allowed", cls.group == ClassGroup::music);
  cls.visual_signature =
      field_or<std::vector<std::string>>(j, "visual_signature", std::vector<std::string>{});
  if (cls.visual_signature.size() > 20) throw FieldError("visual_signature longer than 20");
  return cls;
}

VideoRecord video_from_json(const json& j) {
  VideoRecord v;
  v.video_id = field<std::string>(j, "video_id");
  v.duration = field<double>(j, "duration");
  v.class_id = field<std::string>(j, "class_id");
  v.query_used = field_or<std::string>(j, "query_used", "");
  if (v.video_id.empty()) throw FieldError("empty video_id");
  if (!(v.duration > 0.0) || !std::isfinite(v.duration)) throw FieldError("duration must be > 0");
  return v;
}

ClipRecord clip_from_json(const json& j) {
  ClipRecord c;
  c.clip_id = field<std::string>(j, "clip_id");
  c.video_id = field<std::string>(j, "video_id");
  c.class_id = field<std::string>(j, "class_id");
  c.start = field<double>(j, "start");
  c.end = field<double>(j, "end");
  c.anchor_frame_time = field_or<double>(j, "anchor_frame_time", c.start + kClipSeconds / 2.0);
  for (const auto& flag : field_or<std::vector<std::string>>(j, "provenance", {})) {
    c.provenance.add(parse_provenance(flag));
  }
  c.split = parse_split(field_or<std::string>(j, "split", "unassigned"));
  if (c.clip_id.empty()) throw FieldError("empty clip_id");
  if (c.start < 0.0) throw FieldError("negative start");
  if (std::abs((c.end - c.start) - kClipSeconds) > kClipWidthTolerance) {
    throw FieldError("duration violation: end - start must be 10 s");
  }
  return c;
}

ScoreRecord score_from_json(const json& j) {
  ScoreRecord r;
  r.clip_id = field<std::string>(j, "clip_id");
  r.scores = field<std::map<std::string, double>>(j, "scores");
  for (const auto& [cls, p] : r.scores) {
    if (!std::isfinite(p)) throw FieldError("non-finite score for class '" + cls + "'");
  }
  return r;
}

StageReport stage_report_from_json(const json& j) {
  StageReport r;
  r.stage = field<int>(j, "stage");
  r.classes_remaining = field<std::size_t>(j, "classes_remaining");
  r.videos_remaining = field<std::size_t>(j, "videos_remaining");
  r.clips_remaining = field<std::size_t>(j, "clips_remaining");
  return r;
}

}  // namespace detail

namespace {

template <typename T, typename Decode, typename Key>
std::vector<T> load_unique(const std::filesystem::path& path, Decode decode, Key key) {
  std::vector<T> out;
  std::unordered_set<std::string> seen;
  detail::read_jsonl(path, [&](const detail::json& j, std::size_t line) {
    T record = decode(j);
    if (!seen.insert(key(record)).second) {
      throw ManifestError(path.string(), line, "duplicate id '" + key(record) + "'");
    }
    out.push_back(std::move(record));
  });
  return out;
}

}  // namespace

std::vector<SoundClass> load_classes(const std::filesystem::path& path) {
  return load_unique<SoundClass>(path, detail::sound_class_from_json,
                                 [](const SoundClass& c) { return c.id; });
}

std::vector<VideoRecord> load_videos(const std::filesystem::path& path) {
  return load_unique<VideoRecord>(path, detail::video_from_json,
                                  [](const VideoRecord& v) { return v.video_id; });
}

std::vector<ClipRecord> load_clips(const std::filesystem::path& path) {
  std::vector<ClipRecord> out;
  std::unordered_set<std::string> seen;
  std::unordered_map<std::string, std::size_t> per_video_class;
  detail::read_jsonl(path, [&](const detail::json& j, std::size_t line) {
    ClipRecord c = detail::clip_from_json(j);
    if (!seen.insert(c.clip_id).second) {
      throw ManifestError(path.string(), line, "duplicate id '" + c.clip_id + "'");
    }
    if (++per_video_class[c.class_id + '\n' + c.video_id] > kMaxClipsPerVideo) {
      throw ManifestError(path.string(), line,
                          "more than 2 clips from video '" + c.video_id + "' in one class");
    }
    out.push_back(std::move(c));
  });
  return out;
}

std::vector<ScoreRecord> load_scores(const std::filesystem::path& path) {
  return load_unique<ScoreRecord>(path, detail::score_from_json,
                                  [](const ScoreRecord& r) { return r.clip_id; });
}

void save_classes(const std::filesystem::path& path, std::span<const SoundClass> classes) {
  detail::save_records(path, classes, [](const SoundClass& c) { return detail::to_json(c); });
}
void save_videos(const std::filesystem::path& path, std::span<const VideoRecord> videos) {
  detail::save_records(path, videos, [](const VideoRecord& v) { return detail::to_json(v); });
}
void save_clips(const std::filesystem::path& path, std::span<const ClipRecord> clips) {
  detail::save_records(path, clips, [](const ClipRecord& c) { return detail::to_json(c); });
}
void save_scores(const std::filesystem::path& path, std::span<const ScoreRecord> scores) {
  detail::save_records(path, scores, [](const ScoreRecord& s) { return detail::to_json(s); });
}

std::size_t count_manifest(const std::filesystem::path& path, ManifestKind kind) {
  switch (kind) {
    case ManifestKind::classes: return load_classes(path).size();
    case ManifestKind::videos: return load_videos(path).size();
    case ManifestKind::clips: return load_clips(path).size();
    case ManifestKind::scores: return load_scores(path).size();
  }
  return 0;
}

void save_stage_report(const std::filesystem::path& path, const StageReport& report) {
  detail::write_json_file(path, detail::to_json(report));
}

StageReport load_stage_report(const std::filesystem::path& path) {
  try {
    return detail::stage_report_from_json(detail::read_json_file(path));
  } catch (const detail::FieldError& e) {
    throw CuratorError("'" + path.string() + "': " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CuratorError("cannot write '" + path.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw CuratorError("write failed for '" + path.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CuratorError("cannot rename onto '" + path.string() + "': " + ec.message());
}

}  // namespace curator
