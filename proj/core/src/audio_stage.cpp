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

#include "curator/audio_stage.hpp"

#include <unordered_map>

#include "json_util.hpp"

namespace curator {

void RejectionPolicy::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InvalidArgument("policy for '" + class_id + "': threshold must be in (0, 1)");
  }
}

RejectionPolicy default_policy(const SoundClass& cls, double threshold) {
  return RejectionPolicy{cls.id, true, !cls.music_allowed, threshold};
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::none: return "none";
    case RejectReason::speech: return "speech";
    case RejectReason::music: return "music";
  }
  return "none";
}

GateVerdict verify_clip(const AudioGateScores& scores, const RejectionPolicy& policy) {
  if (policy.reject_speech && scores.speech > policy.threshold) {
    return {false, RejectReason::speech};
  }
  if (policy.reject_music && scores.music > policy.threshold) {
    return {false, RejectReason::music};
  }
  return {true, RejectReason::none};
}

std::vector<ClipRecord> drop_small_classes(std::span<SoundClass> classes,
                                           std::span<const ClipRecord> clips,
                                           std::size_t min_clips) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& c : clips) ++counts[c.class_id];
  for (auto& cls : classes) {
    if (cls.status != ClassStatus::dropped && counts[cls.id] < min_clips) {
      advance_status(cls, ClassStatus::dropped);
    }
  }
  return clips_of_live_classes(clips, classes);
}

AudioStageResult run_audio_stage(std::span<SoundClass> classes, std::span<const ClipRecord> clips,
                                 std::span<const AudioGateScores> scores,
                                 const std::map<std::string, RejectionPolicy>& policies,
                                 const AudioStageConfig& cfg) {
  AudioStageResult result;

  std::unordered_map<std::string, const AudioGateScores*> score_by_clip;
  for (const auto& s : scores) score_by_clip[s.clip_id] = &s;
  std::unordered_map<std::string, RejectionPolicy> policy_by_class;
  for (const auto& cls : classes) {
    auto it = policies.find(cls.id);
    auto policy = it != policies.end() ? it->second : default_policy(cls, cfg.threshold);
    policy.class_id = cls.id;
    policy.validate();
    policy_by_class.emplace(cls.id, std::move(policy));
  }

  std::vector<ClipRecord> accepted;
  for (const auto& clip : clips) {
    auto policy = policy_by_class.find(clip.class_id);
    if (policy == policy_by_class.end()) {
      result.warnings.push_back("clip '" + clip.clip_id + "': unknown class '" + clip.class_id + "'");
      continue;
    }
    auto s = score_by_clip.find(clip.clip_id);
    if (s == score_by_clip.end()) {
      result.missing_scores.push_back(clip.clip_id);
      if (cfg.on_missing == MissingScores::keep) accepted.push_back(clip);
      continue;
    }
    const auto verdict = verify_clip(*s->second, policy->second);
    if (!verdict.accepted) {
      result.rejected.emplace(clip.clip_id, verdict.reason);
      continue;
    }
    auto kept = clip;
    kept.provenance.add(Provenance::audio_pass);
    accepted.push_back(std::move(kept));
  }
  if (!result.missing_scores.empty()) {
    result.warnings.push_back(std::to_string(result.missing_scores.size()) +
                              " clips have no audio scores (" +
                              (cfg.on_missing == MissingScores::keep ? "kept" : "dropped") + ")");
  }

  accepted = drop_small_classes(classes, accepted, cfg.min_clips);
  result.report = stage_report(classes, {}, accepted, 3, cfg.min_videos);
  for (auto& c : classes) {
    if (c.status != ClassStatus::dropped) advance_status(c, ClassStatus::audio_verified);
  }
  result.clips = clips_of_live_classes(accepted, classes);
  return result;
}

std::vector<AudioGateScores> load_gate_scores(const std::filesystem::path& path) {
  std::vector<AudioGateScores> out;
  detail::read_jsonl(path, [&](const detail::json& j, std::size_t) {
    AudioGateScores s;
    s.clip_id = detail::field<std::string>(j, "clip_id");
    s.speech = detail::field<double>(j, "speech");
    s.music = detail::field<double>(j, "music");
    s.other = detail::field_or<double>(j, "other", 0.0);
    for (double v : {s.speech, s.music, s.other}) {
      if (!(v >= 0.0 && v <= 1.0)) throw detail::FieldError("gate score outside [0, 1]");
    }
    out.push_back(std::move(s));
  });
  return out;
}

void save_gate_scores(const std::filesystem::path& path, std::span<const AudioGateScores> scores) {
  detail::save_records(path, scores, [](const AudioGateScores& s) {
    return detail::json{
        {"clip_id", s.clip_id}, {"speech", s.speech}, {"music", s.music}, {"other", s.other}};
  });
}

std::map<std::string, RejectionPolicy> load_policies(const std::filesystem::path& path,
                                                     double default_threshold) {
  std::map<std::string, RejectionPolicy> out;
  detail::read_jsonl(path, [&](const detail::json& j, std::size_t line) {
    RejectionPolicy p;
    p.class_id = detail::field<std::string>(j, "class_id");
    p.reject_speech = detail::field_or<bool>(j, "reject_speech", true);
    p.reject_music = detail::field<bool>(j, "reject_music");
    p.threshold = detail::field_or<double>(j, "threshold", default_threshold);
    p.validate();
    if (!out.emplace(p.class_id, p).second) {
      throw ManifestError(path.string(), line, "duplicate id '" + p.class_id + "'");
    }
  });
  return out;
}

}  // namespace curator
