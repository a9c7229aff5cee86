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

#include "curator/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "curator/audio_stage.hpp"
#include "curator/classifier.hpp"
#include "curator/config.hpp"
#include "curator/corpus.hpp"
#include "curator/noise_filter.hpp"
#include "curator/signature_matcher.hpp"
#include "curator/visual_stage.hpp"
#include "json_util.hpp"

namespace curator {

namespace fs = std::filesystem;

void FixtureSpec::validate() const {
  if (classes < 4) throw InvalidArgument("fixture needs at least 4 classes");
  if (videos_per_class < narrated + noisy + hard + 2 * duplicates + 1) {
    throw InvalidArgument("fixture roles exceed videos_per_class");
  }
  if (audio_dim < 2 || visual_dim < 2) throw InvalidArgument("feature dimensions must be >= 2");
}

namespace {

struct ClassInfo {
  const char* label;
  const char* object;
  ClassGroup group;
};

constexpr ClassInfo kNamed[] = {
    {"playing violin", "violin", ClassGroup::music},
    {"dog barking", "dog", ClassGroup::animals},
    {"car engine starting", "car", ClassGroup::vehicle},
    {"chainsawing trees", "chainsaw", ClassGroup::tools},
    {"cat purring", "cat", ClassGroup::animals},
    {"church bell ringing", "bell", ClassGroup::others},
    {"playing drum kit", "drum", ClassGroup::music},
    {"lawn mowing", "lawn mower", ClassGroup::home},
    {"baby crying", "baby", ClassGroup::people},
    {"waterfall burbling", "waterfall", ClassGroup::nature},
};

constexpr const char* kSceneLabels[] = {"person", "tree", "road", "building", "grass", "sky"};

enum class Role { narrated, noisy, hard, duplicate, easy };

struct FixtureVideo {
  VideoRecord record;
  std::size_t cls = 0;
  Role role = Role::easy;
  std::size_t true_class = 0;
  std::string copy_of;  // duplicate source video
};

std::string two_digits(std::size_t i) {
  return (i < 10 ? "0" : "") + std::to_string(i);
}

std::string three_digits(std::size_t i) {
  return std::string(i < 10 ? "00" : (i < 100 ? "0" : "")) + std::to_string(i);
}

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t dim, double sd) {
  std::normal_distribution<double> n(0.0, sd);
  std::vector<double> v(dim);
  for (auto& x : v) x = n(rng);
  return v;
}

std::vector<double> normalized(std::vector<double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

}  // namespace

FixtureSummary write_fixture(const std::filesystem::path& dir, const FixtureSpec& spec) {
  spec.validate();
  fs::create_directories(dir);
  std::mt19937_64 rng(spec.seed);

  // --- classes -------------------------------------------------------------
  std::vector<SoundClass> classes;
  std::vector<std::string> objects;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    SoundClass cls;
    cls.id = "fx" + two_digits(c);
    if (c < std::size(kNamed)) {
      cls.display_label = kNamed[c].label;
      cls.group = kNamed[c].group;
      objects.emplace_back(kNamed[c].object);
    } else {
      cls.display_label = "sound source " + std::to_string(c);
      objects.push_back("source " + std::to_string(c));
    }
    cls.music_allowed = cls.group == ClassGroup::music;
    classes.push_back(cls);
  }
  // Decoys: too few videos (dropped at stage 1), never visible (dropped at stage 2).
  classes.push_back({"fx_small", "penguins braying", ClassGroup::animals, ClassStatus::candidate, false, {}});
  classes.push_back({"fx_hidden", "wind chime tinkling", ClassGroup::others, ClassStatus::candidate, false, {}});
  const std::string hidden_object = "wind chime";
  save_classes(dir / "classes.jsonl", classes);

  // --- videos and roles ----------------------------------------------------
  std::vector<FixtureVideo> videos;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    std::vector<std::size_t> order(spec.videos_per_class);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Role> roles(spec.videos_per_class, Role::easy);
    std::size_t pos = 0;
    auto assign = [&](std::size_t n, Role r) {
      for (std::size_t i = 0; i < n; ++i) roles[order[pos++]] = r;
    };
    assign(spec.narrated, Role::narrated);
    assign(spec.noisy, Role::noisy);
    assign(spec.hard, Role::hard);
    assign(spec.duplicates, Role::duplicate);

    std::vector<std::string> easy_ids;
    std::size_t noisy_seen = 0;
    const std::size_t first = videos.size();
    for (std::size_t v = 0; v < spec.videos_per_class; ++v) {
      FixtureVideo fv;
      fv.record = {classes[c].id + "_v" + three_digits(v), 60.0, classes[c].id, classes[c].display_label};
      fv.cls = c;
      fv.role = roles[v];
      fv.true_class = c;
      if (fv.role == Role::noisy) {
        const std::size_t shift = 1 + noisy_seen++ % (spec.classes - 1);
        fv.true_class = (c + shift) % spec.classes;
      }
      if (fv.role == Role::easy) easy_ids.push_back(fv.record.video_id);
      videos.push_back(fv);
    }
    std::size_t dup = 0;
    for (std::size_t v = first; v < videos.size(); ++v) {
      if (videos[v].role == Role::duplicate) videos[v].copy_of = easy_ids[dup++ % easy_ids.size()];
    }
  }
  std::vector<VideoRecord> records;
  for (const auto& v : videos) records.push_back(v.record);
  std::vector<VideoRecord> decoy_small, decoy_hidden;
  for (std::size_t v = 0; v < 20; ++v) decoy_small.push_back({"fx_small_v" + three_digits(v), 60.0, "fx_small", "penguins braying"});
  for (std::size_t v = 0; v < 40; ++v) decoy_hidden.push_back({"fx_hidden_v" + three_digits(v), 60.0, "fx_hidden", "wind chime tinkling"});
  records.insert(records.end(), decoy_small.begin(), decoy_small.end());
  records.insert(records.end(), decoy_hidden.begin(), decoy_hidden.end());
  save_videos(dir / "videos.jsonl", records);

  // --- query lexicons --------------------------------------------------------
  detail::write_json_file(dir / "lexicon_synonyms.json",
                          {{"kind", "synonym"},
                           {"language", "en"},
                           {"entries",
                            {{"dog barking", {"barking dog", "dog bark"}},
                             {"baby crying", {"infant crying"}},
                             {"cat purring", {"purring cat"}}}}});
  detail::write_json_file(dir / "lexicon_es.json",
                          {{"kind", "translation"},
                           {"language", "es"},
                           {"entries",
                            {{"dog barking", {"perro ladrando"}},
                             {"playing violin", {"tocando el violin"}},
                             {"baby crying", {"bebe llorando"}}}}});

  // --- visual vocabulary and embeddings ---------------------------------------
  std::vector<std::string> visual_labels = objects;
  visual_labels.push_back(hidden_object);
  visual_labels.push_back("penguin");
  for (const auto* s : kSceneLabels) visual_labels.emplace_back(s);
  {
    std::string text;
    for (const auto& l : visual_labels) text += l + "\n";
    write_file_atomic(dir / "visual_labels.txt", text);
  }
  constexpr std::size_t kEmbeddingDim = 16;
  EmbeddingTable table(kEmbeddingDim);
  std::vector<std::string> tokens;
  auto collect = [&](const std::string& phrase) {
    std::size_t start = 0;
    while (start < phrase.size()) {
      auto end = phrase.find(' ', start);
      if (end == std::string::npos) end = phrase.size();
      tokens.push_back(phrase.substr(start, end - start));
      start = end + 1;
    }
  };
  for (const auto& c : classes) collect(c.display_label);
  for (const auto& l : visual_labels) collect(l);
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  tokens.erase(std::remove(tokens.begin(), tokens.end(), "chainsawing"), tokens.end());
  for (const auto& t : tokens) table.add(t, gaussian(rng, kEmbeddingDim, 1.0));
  table.save(dir / "embeddings.txt");
  // "chainsawing" is out of vocabulary and "mowing" shares no vector with
  // "mower", so those classes lean on keyword overrides.
  save_overrides(dir / "overrides.json", {{"chainsawing trees", "chainsaw"}, {"lawn mowing", "lawn mower"}});

  // --- frame scores ---------------------------------------------------------
  std::vector<FrameScore> frames;
  std::uniform_int_distribution<int> early(0, 4);
  std::uniform_int_distribution<int> late(7, 11);
  auto add_video_frames = [&](const std::string& video_id, const std::string& object, bool visible) {
    const int j1 = early(rng);
    const int j2 = late(rng);
    for (int j = 0; j < 12; ++j) {
      FrameScore f{video_id, 2.5 + 5.0 * j, {}};
      double s = 0.05;
      if (visible) {
        if (j == j1) s = 0.9;
        else if (j == j2) s = 0.8;
        else if (j == j1 + 1) s = 0.6;   // overlaps the first window; suppressed
        else if (j == 6) s = 0.5;        // overlaps the second window or exceeds the cap
        else if (j == 5) s = 0.2;        // not strictly above the threshold
      } else if (j % 3 == 0) {
        s = 0.2;
      }
      f.scores[object] = s;
      f.scores["person"] = 0.15;
      frames.push_back(std::move(f));
    }
  };
  for (const auto& v : videos) add_video_frames(v.record.video_id, objects[v.cls], true);
  for (const auto& v : decoy_small) add_video_frames(v.video_id, "penguin", true);
  for (const auto& v : decoy_hidden) add_video_frames(v.video_id, hidden_object, false);
  save_frame_scores(dir / "frame_scores.jsonl", frames);

  // The clips stage 2 will carve, reproduced here to key gate scores and features.
  SignatureMap object_only;
  for (std::size_t c = 0; c < spec.classes; ++c) object_only[classes[c].id] = {objects[c]};
  std::map<std::string, std::vector<ClipRecord>> clips_of;
  {
    std::map<std::string, std::vector<FrameScore>> by_video;
    for (const auto& f : frames) by_video[f.video_id].push_back(f);
    for (const auto& v : videos) {
      const auto anchors = select_anchor_frames(by_video[v.record.video_id], object_only[v.record.class_id]);
      clips_of[v.record.video_id] = carve_clips(anchors, v.record);
    }
  }

  // --- audio gate scores ------------------------------------------------------
  std::vector<AudioGateScores> gate;
  std::uniform_real_distribution<double> quiet(0.0, 0.4);
  std::size_t narrated_seen = 0;
  for (const auto& v : videos) {
    const bool music_ok = classes[v.cls].music_allowed;
    const bool narrated = v.role == Role::narrated;
    const bool by_music = narrated && !music_ok && narrated_seen++ % 2 == 1;
    for (const auto& clip : clips_of[v.record.video_id]) {
      AudioGateScores g{clip.clip_id, quiet(rng), quiet(rng), 0.0};
      if (narrated) (by_music ? g.music : g.speech) = by_music ? 0.75 : 0.85;
      if (!narrated && music_ok) g.music = 0.9;  // allowed for music classes
      g.other = 1.0 - std::max(g.speech, g.music);
      gate.push_back(g);
    }
  }
  // One clip sits exactly on the threshold and must pass the strict gate.
  for (auto& g : gate) {
    if (g.speech < 0.5 && g.music < 0.5) {
      g.speech = 0.5;
      break;
    }
  }
  save_gate_scores(dir / "gate_scores.jsonl", gate);

  // --- audio and visual features ---------------------------------------------
  std::vector<std::vector<double>> audio_mean(spec.classes, std::vector<double>(spec.audio_dim, 0.0));
  for (std::size_t c = 0; c < spec.classes; ++c) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(spec.classes);
    audio_mean[c][0] = spec.ring_radius * std::cos(angle);
    audio_mean[c][1] = spec.ring_radius * std::sin(angle);
  }
  std::vector<std::vector<double>> prototype;
  for (std::size_t c = 0; c < spec.classes; ++c) prototype.push_back(normalized(gaussian(rng, spec.visual_dim, 1.0)));

  std::map<std::string, std::vector<double>> audio_of, visual_of;
  FixtureSummary summary;
  std::vector<detail::json> truth_lines, oracle_lines;
  std::size_t correct = 0;
  // Duplicates copy features, so their sources come first.
  std::vector<const FixtureVideo*> order;
  for (const auto& v : videos) if (v.role != Role::duplicate) order.push_back(&v);
  for (const auto& v : videos) if (v.role == Role::duplicate) order.push_back(&v);
  for (const auto* vp : order) {
    const auto& v = *vp;
    const auto& clips = clips_of[v.record.video_id];
    for (std::size_t k = 0; k < clips.size(); ++k) {
      const auto& clip = clips[k];
      std::vector<double> a = gaussian(rng, spec.audio_dim, spec.audio_noise);
      std::vector<double> vis = gaussian(rng, spec.visual_dim, spec.visual_noise);
      if (v.role == Role::hard) {
        const auto far = (v.cls + spec.classes / 2) % spec.classes;
        for (std::size_t d = 0; d < spec.audio_dim; ++d) a[d] += 0.4 * audio_mean[v.cls][d] + 0.6 * audio_mean[far][d];
      } else {
        for (std::size_t d = 0; d < spec.audio_dim; ++d) a[d] += audio_mean[v.true_class][d];
      }
      if (v.role == Role::noisy) {
        vis = gaussian(rng, spec.visual_dim, 1.0);  // scene unrelated to the labeled object
      } else {
        for (std::size_t d = 0; d < spec.visual_dim; ++d) vis[d] += prototype[v.cls][d];
      }
      if (v.role == Role::duplicate) {
        const auto& source = clips_of[v.copy_of];
        const auto& src = source[std::min(k, source.size() - 1)].clip_id;
        a = audio_of.at(src);
        vis = visual_of.at(src);
      }
      audio_of[clip.clip_id] = a;
      visual_of[clip.clip_id] = normalized(vis);

      const auto& planted = classes[v.true_class].id;
      summary.truth[clip.clip_id] = planted;
      truth_lines.push_back({{"clip_id", clip.clip_id}, {"class_id", planted}});
      oracle_lines.push_back({{"clip_id", clip.clip_id},
                              {"verdict", planted == clip.class_id ? "correct" : "incorrect"}});
      if (v.role != Role::narrated) {
        ++summary.stage4_clips;
        if (planted == clip.class_id) ++correct;
      }
    }
  }
  std::vector<FeatureVector> audio_features, visual_features;
  for (const auto& [id, vec] : audio_of) audio_features.push_back({id, vec});
  for (const auto& [id, vec] : visual_of) visual_features.push_back({id, vec});
  save_features(dir / "audio_features.jsonl", audio_features);
  save_features(dir / "visual_features.jsonl", visual_features);
  detail::write_jsonl(dir / "truth.jsonl", truth_lines);
  detail::write_jsonl(dir / "review_oracle.jsonl", oracle_lines);
  summary.stage4_purity = summary.stage4_clips == 0
                              ? 0.0
                              : static_cast<double>(correct) / static_cast<double>(summary.stage4_clips);

  // --- pipeline config ---------------------------------------------------------
  PipelineConfig cfg;
  cfg.seed = spec.seed;
  cfg.run_dir = "run";
  cfg.inputs.classes = "classes.jsonl";
  cfg.inputs.videos = "videos.jsonl";
  cfg.inputs.lexicons = {"lexicon_synonyms.json", "lexicon_es.json"};
  cfg.inputs.frame_scores = "frame_scores.jsonl";
  cfg.inputs.visual_labels = "visual_labels.txt";
  cfg.inputs.embeddings = "embeddings.txt";
  cfg.inputs.overrides = "overrides.json";
  cfg.inputs.gate_scores = "gate_scores.jsonl";
  cfg.inputs.audio_features = "audio_features.jsonl";
  cfg.inputs.visual_features = "visual_features.jsonl";
  cfg.inputs.review_oracle = "review_oracle.jsonl";
  cfg.signature_k = 3;
  cfg.min_videos = 30;
  cfg.min_clips = 60;
  cfg.learning_rate = 1e-2;
  cfg.validate();
  summary.config = dir / "pipeline.toml";
  cfg.save(summary.config);
  return summary;
}

}  // namespace curator
