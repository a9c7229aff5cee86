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

#include <random>

#include "curator/corpus.hpp"
#include "test_support.hpp"

namespace curator {
namespace {

using testing::TempDir;
using testing::clip;
using testing::write_text;

SoundClass make_class(const std::string& id) {
  SoundClass c;
  c.id = id;
  c.display_label = id + " sound";
  return c;
}

TEST(ClipId, UsesRoundedMilliseconds) {
  EXPECT_EQ(make_clip_id("abc", 12.3456), "abc:12346");
  EXPECT_EQ(make_clip_id("abc", 0.0), "abc:0");
  EXPECT_EQ(make_clip("v", "c", 2300, 7.3).clip_id, "v:2300");
  EXPECT_DOUBLE_EQ(make_clip("v", "c", 2300, 7.3).end, 12.3);
}

TEST(Status, ForwardTransitionsOnly) {
  EXPECT_TRUE(can_transition(ClassStatus::candidate, ClassStatus::visually_verified));
  EXPECT_TRUE(can_transition(ClassStatus::audio_verified, ClassStatus::retained));
  EXPECT_TRUE(can_transition(ClassStatus::visually_verified, ClassStatus::dropped));
  EXPECT_FALSE(can_transition(ClassStatus::retained, ClassStatus::candidate));
  EXPECT_FALSE(can_transition(ClassStatus::dropped, ClassStatus::candidate));
  EXPECT_TRUE(can_transition(ClassStatus::candidate, ClassStatus::audio_verified));
  EXPECT_FALSE(can_transition(ClassStatus::audio_verified, ClassStatus::visually_verified));

  auto c = make_class("a");
  advance_status(c, ClassStatus::visually_verified);
  EXPECT_THROW(advance_status(c, ClassStatus::candidate), InvalidArgument);
}

TEST(Manifest, ClipRoundTrip) {
  TempDir dir;
  std::vector<ClipRecord> clips = {clip("v1", "a", 0.0), clip("v1", "a", 20.0), clip("v2", "b", 3.5)};
  clips[0].provenance = {Provenance::visual_pass, Provenance::audio_pass};
  clips[2].split = Split::test;
  save_clips(dir / "clips.jsonl", clips);
  EXPECT_EQ(load_clips(dir / "clips.jsonl"), clips);
  EXPECT_EQ(count_manifest(dir / "clips.jsonl", ManifestKind::clips), 3U);
}

TEST(Manifest, ClassAndVideoRoundTrip) {
  TempDir dir;
  auto a = make_class("a");
  a.group = ClassGroup::music;
  a.music_allowed = true;
  a.visual_signature = {"violin", "cello"};
  std::vector<SoundClass> classes = {a, make_class("b")};
  save_classes(dir / "c.jsonl", classes);
  EXPECT_EQ(load_classes(dir / "c.jsonl"), classes);

  std::vector<VideoRecord> videos = {{"v1", 61.5, "a", "playing violin"}};
  save_videos(dir / "v.jsonl", videos);
  EXPECT_EQ(load_videos(dir / "v.jsonl"), videos);
}

TEST(Manifest, DurationViolationNamesLine) {
  TempDir dir;
  write_text(dir / "clips.jsonl",
             "{\"clip_id\":\"v:0\",\"video_id\":\"v\",\"class_id\":\"a\",\"start\":0,\"end\":10,"
             "\"anchor_frame_time\":5,\"provenance\":[],\"split\":\"unassigned\"}\n"
             "{\"clip_id\":\"v:20000\",\"video_id\":\"v\",\"class_id\":\"a\",\"start\":20,\"end\":29,"
             "\"anchor_frame_time\":25,\"provenance\":[],\"split\":\"unassigned\"}\n");
  try {
    load_clips(dir / "clips.jsonl");
    FAIL() << "expected ManifestError";
  } catch (const ManifestError& e) {
    EXPECT_EQ(e.line(), 2U);
    EXPECT_NE(std::string(e.what()).find("duration violation"), std::string::npos);
  }
}

TEST(Manifest, DuplicateIdRejected) {
  TempDir dir;
  std::vector<ClipRecord> clips = {clip("v1", "a", 0.0)};
  save_clips(dir / "clips.jsonl", clips);
  const auto line = testing::read_text(dir / "clips.jsonl");
  write_text(dir / "dup.jsonl", line + line);
  try {
    load_clips(dir / "dup.jsonl");
    FAIL() << "expected ManifestError";
  } catch (const ManifestError& e) {
    EXPECT_EQ(e.line(), 2U);
    EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
  }
}

TEST(Manifest, ThirdClipFromOneVideoRejected) {
  TempDir dir;
  std::vector<ClipRecord> clips = {clip("v1", "a", 0.0), clip("v1", "a", 20.0), clip("v1", "a", 40.0)};
  save_clips(dir / "clips.jsonl", clips);
  EXPECT_THROW(load_clips(dir / "clips.jsonl"), ManifestError);
}

TEST(Manifest, MalformedJsonNamesLine) {
  TempDir dir;
  write_text(dir / "c.jsonl", "{\"id\":\"a\",\"display_label\":\"x\"}\n\n{not json\n");
  try {
    load_classes(dir / "c.jsonl");
    FAIL();
  } catch (const ManifestError& e) {
    EXPECT_EQ(e.line(), 3U);
  }
}

TEST(StageReport, DropsClassesBelowMinimumVideos) {
  std::vector<SoundClass> classes = {make_class("a"), make_class("b")};
  std::vector<VideoRecord> videos;
  for (int i = 0; i < 100; ++i) videos.push_back({"a" + std::to_string(i), 30, "a", ""});
  for (int i = 0; i < 99; ++i) videos.push_back({"b" + std::to_string(i), 30, "b", ""});
  const auto r = stage_report(classes, videos, {}, 1, 100);
  EXPECT_EQ(r, (StageReport{1, 1, 100, 0}));
  EXPECT_EQ(classes[0].status, ClassStatus::candidate);
  EXPECT_EQ(classes[1].status, ClassStatus::dropped);
}

TEST(StageReport, LaterStagesCountVideosWithClips) {
  std::vector<SoundClass> classes = {make_class("a")};
  std::vector<VideoRecord> videos = {{"v1", 30, "a", ""}, {"v2", 30, "a", ""}, {"v3", 30, "a", ""}};
  std::vector<ClipRecord> clips = {clip("v1", "a", 0), clip("v1", "a", 15), clip("v2", "a", 0)};
  EXPECT_EQ(stage_report(classes, videos, clips, 2, 1), (StageReport{2, 1, 2, 3}));
  EXPECT_THROW(stage_report(classes, videos, clips, 5, 1), InvalidArgument);
}

TEST(StageReport, MonotoneCascade) {
  std::vector<StageReport> ok = {{1, 10, 100, 0}, {2, 9, 90, 180}, {3, 9, 80, 160}, {4, 8, 70, 140}};
  EXPECT_TRUE(is_monotone_cascade(ok));
  ok[2].videos_remaining = 95;
  EXPECT_FALSE(is_monotone_cascade(ok));
}

TEST(Diff, PartitionsBefore) {
  std::vector<ClipRecord> before = {clip("v1", "a", 0), clip("v2", "a", 0), clip("v3", "a", 0)};
  std::vector<ClipRecord> after = {before[2], before[0]};
  const auto d = diff_manifests(before, after);
  ASSERT_EQ(d.kept.size(), 2U);
  EXPECT_EQ(d.kept[0].clip_id, "v1:0");
  EXPECT_EQ(d.kept[1].clip_id, "v3:0");
  ASSERT_EQ(d.removed.size(), 1U);
  EXPECT_EQ(d.removed[0].clip_id, "v2:0");
}

TEST(Diff, RandomPartitionProperty) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ClipRecord> before, after;
    const int n = static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      before.push_back(clip("v" + std::to_string(i), "a", 0));
      if (rng() % 2 == 0) after.push_back(before.back());
    }
    const auto d = diff_manifests(before, after);
    EXPECT_EQ(d.kept.size() + d.removed.size(), before.size());
    EXPECT_EQ(d.kept, after);
  }
}

TEST(Bounds, ClipBeyondVideoRejected) {
  std::vector<VideoRecord> videos = {{"v1", 12.0, "a", ""}};
  std::vector<ClipRecord> ok = {clip("v1", "a", 2.0)};
  EXPECT_NO_THROW(validate_clip_bounds(ok, videos));
  std::vector<ClipRecord> bad = {clip("v1", "a", 2.5)};
  EXPECT_THROW(validate_clip_bounds(bad, videos), InvalidArgument);
}

TEST(Enums, ParseRoundTrip) {
  for (auto s : {ClassStatus::candidate, ClassStatus::visually_verified, ClassStatus::audio_verified,
                 ClassStatus::retained, ClassStatus::dropped}) {
    EXPECT_EQ(parse_status(to_string(s)), s);
  }
  for (auto s : {Split::unassigned, Split::train, Split::val, Split::test}) EXPECT_EQ(parse_split(to_string(s)), s);
  EXPECT_THROW(parse_group("robots"), InvalidArgument);
}

}  // namespace
}  // namespace curator
