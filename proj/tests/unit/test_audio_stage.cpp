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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "curator/audio_stage.hpp"
#include "test_support.hpp"

namespace curator {
namespace {

using testing::clip;

RejectionPolicy policy(bool speech, bool music, double threshold = 0.5) {
  return {"c", speech, music, threshold};
}

TEST(Verify, SpeechRejectedMusicAllowed) {
  const auto p = policy(true, false);
  EXPECT_EQ(verify_clip({"x", 0.7, 0.0, 0.3}, p), (GateVerdict{false, RejectReason::speech}));
  EXPECT_EQ(verify_clip({"x", 0.1, 0.9, 0.0}, p), (GateVerdict{true, RejectReason::none}));
}

TEST(Verify, MusicRejectedForNonMusicClass) {
  EXPECT_EQ(verify_clip({"x", 0.1, 0.6, 0.3}, policy(true, true)),
            (GateVerdict{false, RejectReason::music}));
}

TEST(Verify, StrictBoundaryAndSpeechFirst) {
  EXPECT_TRUE(verify_clip({"x", 0.5, 0.5, 0.0}, policy(true, true)).accepted);
  EXPECT_EQ(verify_clip({"x", 0.9, 0.9, 0.0}, policy(true, true)).reason, RejectReason::speech);
  EXPECT_TRUE(verify_clip({"x", 1.0, 1.0, 1.0}, policy(false, false)).accepted);
}

TEST(Policy, DefaultFollowsGroup) {
  SoundClass music;
  music.id = "m";
  music.group = ClassGroup::music;
  music.music_allowed = true;
  EXPECT_FALSE(default_policy(music).reject_music);
  SoundClass dog;
  dog.id = "d";
  dog.group = ClassGroup::animals;
  EXPECT_TRUE(default_policy(dog).reject_music);
  EXPECT_TRUE(default_policy(dog).reject_speech);
  EXPECT_THROW(policy(true, true, 1.0).validate(), InvalidArgument);
  EXPECT_THROW(policy(true, true, 0.0).validate(), InvalidArgument);
}

struct Corpus {
  std::vector<SoundClass> classes;
  std::vector<ClipRecord> clips;
  std::vector<AudioGateScores> scores;
};

Corpus corpus(std::size_t clean, std::size_t noisy) {
  Corpus c;
  c.classes.resize(1);
  c.classes[0].id = "c";
  c.classes[0].display_label = "dog barking";
  c.classes[0].status = ClassStatus::visually_verified;
  for (std::size_t i = 0; i < clean + noisy; ++i) {
    c.clips.push_back(clip("v" + std::to_string(i), "c", 0.0));
    c.scores.push_back({c.clips.back().clip_id, i < clean ? 0.1 : 0.9, 0.0, 0.5});
  }
  return c;
}

TEST(Stage, ClipMinimumBoundary) {
  AudioStageConfig cfg;
  cfg.min_videos = 1;
  auto ok = corpus(200, 5);
  auto r = run_audio_stage(ok.classes, ok.clips, ok.scores, {}, cfg);
  EXPECT_EQ(r.clips.size(), 200U);
  EXPECT_EQ(r.rejected.size(), 5U);
  EXPECT_EQ(ok.classes[0].status, ClassStatus::audio_verified);
  EXPECT_EQ(r.report, (StageReport{3, 1, 200, 200}));
  for (const auto& c : r.clips) EXPECT_TRUE(c.provenance.has(Provenance::audio_pass));

  auto short_by_one = corpus(199, 5);
  r = run_audio_stage(short_by_one.classes, short_by_one.clips, short_by_one.scores, {}, cfg);
  EXPECT_TRUE(r.clips.empty());
  EXPECT_EQ(short_by_one.classes[0].status, ClassStatus::dropped);
}

TEST(Stage, VacuousGateKeepsAll) {
  auto c = corpus(10, 0);
  for (auto& s : c.scores) s.speech = s.music = 0.0;
  AudioStageConfig cfg;
  cfg.min_clips = 1;
  cfg.min_videos = 1;
  EXPECT_EQ(run_audio_stage(c.classes, c.clips, c.scores, {}, cfg).clips.size(), 10U);
}

TEST(Stage, MissingScoresKeepOrDrop) {
  AudioStageConfig cfg;
  cfg.min_clips = 1;
  cfg.min_videos = 1;
  auto c = corpus(10, 0);
  c.scores.resize(7);
  auto r = run_audio_stage(c.classes, c.clips, c.scores, {}, cfg);
  EXPECT_EQ(r.clips.size(), 7U);
  EXPECT_EQ(r.missing_scores.size(), 3U);
  cfg.on_missing = MissingScores::keep;
  auto k = corpus(10, 0);
  k.scores.resize(7);
  r = run_audio_stage(k.classes, k.clips, k.scores, {}, cfg);
  EXPECT_EQ(r.clips.size(), 10U);
  EXPECT_EQ(r.missing_scores.size(), 3U);
}

TEST(StageProperty, SubsetIdentityAndMonotone) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u;
  AudioStageConfig cfg;
  cfg.min_clips = 1;
  cfg.min_videos = 1;
  for (int trial = 0; trial < 30; ++trial) {
    auto c = corpus(40, 0);
    for (auto& s : c.scores) {
      s.speech = u(rng);
      s.music = u(rng);
    }
    std::set<std::string> input;
    for (const auto& cl : c.clips) input.insert(cl.clip_id);

    std::size_t previous = SIZE_MAX;
    for (double t : {0.9, 0.7, 0.5, 0.3, 0.1}) {
      auto copy = c;
      const std::map<std::string, RejectionPolicy> p = {{"c", policy(true, true, t)}};
      const auto r = run_audio_stage(copy.classes, copy.clips, copy.scores, p, cfg);
      EXPECT_LE(r.clips.size(), previous);
      previous = r.clips.size();
      for (const auto& cl : r.clips) EXPECT_TRUE(input.contains(cl.clip_id));
    }
    auto copy = c;
    const std::map<std::string, RejectionPolicy> open = {{"c", policy(false, false)}};
    EXPECT_EQ(run_audio_stage(copy.classes, copy.clips, copy.scores, open, cfg).clips.size(), 40U);
  }
}

TEST(Files, ScoresAndPolicies) {
  testing::TempDir dir;
  const std::vector<AudioGateScores> s = {{"v:0", 0.25, 0.5, 0.125}};
  save_gate_scores(dir / "s.jsonl", s);
  EXPECT_EQ(load_gate_scores(dir / "s.jsonl"), s);
  testing::write_text(dir / "p.jsonl",
                      "{\"class_id\":\"a\",\"reject_speech\":true,\"reject_music\":false}\n"
                      "{\"class_id\":\"b\",\"reject_speech\":true,\"reject_music\":true,\"threshold\":0.7}\n");
  const auto p = load_policies(dir / "p.jsonl", 0.4);
  EXPECT_DOUBLE_EQ(p.at("a").threshold, 0.4);
  EXPECT_FALSE(p.at("a").reject_music);
  EXPECT_DOUBLE_EQ(p.at("b").threshold, 0.7);
}

TEST(DropSmall, RemovesClassesUnderMinimum) {
  std::vector<SoundClass> classes(2);
  classes[0].id = "a";
  classes[1].id = "b";
  const std::vector<ClipRecord> clips = {clip("v1", "a", 0), clip("v2", "a", 0), clip("v3", "b", 0)};
  const auto kept = drop_small_classes(classes, clips, 2);
  EXPECT_EQ(kept.size(), 2U);
  EXPECT_EQ(classes[1].status, ClassStatus::dropped);
}

}  // namespace
}  // namespace curator
