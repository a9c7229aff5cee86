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

#include "curator/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "curator/audio_stage.hpp"
#include "curator/classifier.hpp"
#include "curator/query_expansion.hpp"
#include "curator/signature_matcher.hpp"
#include "curator/splits.hpp"
#include "curator/visual_stage.hpp"
#include "json_util.hpp"

namespace curator {

namespace fs = std::filesystem;

std::filesystem::path RunLayout::classes(int stage) const {
  return manifests() / ("classes.stage" + std::to_string(stage) + ".jsonl");
}

std::filesystem::path RunLayout::clips(int stage) const {
  return manifests() / ("clips.stage" + std::to_string(stage) + ".jsonl");
}

std::filesystem::path RunLayout::report(int stage) const {
  return root_ / "reports" / ("stage" + std::to_string(stage) + ".json");
}

std::filesystem::path RunLayout::log(int stage) const {
  return root_ / "logs" / ("stage" + std::to_string(stage) + ".log");
}

namespace {

detail::json state_to_json(const RunState& state) {
  detail::json reports = detail::json::array();
  for (const auto& r : state.stage_reports) reports.push_back(detail::to_json(r));
  return {{"run_id", state.run_id},
          {"config_hash", state.config_hash},
          {"completed_stages", std::vector<int>(state.completed_stages.begin(), state.completed_stages.end())},
          {"stage_reports", reports}};
}

void require(const fs::path& path, int stage, const char* what) {
  if (!fs::exists(path)) {
    throw MissingUpstream("stage " + std::to_string(stage) + " needs " + what + " '" +
                          path.string() + "'");
  }
}

void require_input(const std::string& configured, const fs::path& resolved, const char* key) {
  if (configured.empty()) throw InvalidArgument(std::string("config key '") + key + "' is not set");
  if (!fs::exists(resolved)) {
    throw MissingUpstream(std::string("input '") + key + "' not found at '" + resolved.string() + "'");
  }
}

void write_log(const fs::path& path, const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  write_file_atomic(path, text);
}

void append(std::vector<std::string>& to, const std::vector<std::string>& from) {
  to.insert(to.end(), from.begin(), from.end());
}

struct StageOutput {
  StageReport report;
  std::vector<std::string> warnings;
};

StageOutput stage1(const PipelineConfig& cfg, const RunLayout& run) {
  const auto& in = cfg.inputs;
  require_input(in.classes, cfg.resolve(in.classes), "inputs.classes");
  require_input(in.videos, cfg.resolve(in.videos), "inputs.videos");
  auto classes = load_classes(cfg.resolve(in.classes));
  auto videos = load_videos(cfg.resolve(in.videos));

  StageOutput out;
  std::vector<Lexicon> lexicons;
  for (const auto& l : in.lexicons) lexicons.push_back(Lexicon::load(cfg.resolve(l)));
  std::vector<QueryVariant> queries;
  for (const auto& c : classes) {
    auto v = expand_queries(c, lexicons);
    queries.insert(queries.end(), v.begin(), v.end());
  }
  emit_query_manifest(queries, run.queries());

  std::vector<VideoRecord> known;
  std::map<std::string, bool> class_ids;
  for (const auto& c : classes) class_ids[c.id] = true;
  for (auto& v : videos) {
    if (!class_ids.contains(v.class_id)) {
      out.warnings.push_back("video '" + v.video_id + "' names unknown class '" + v.class_id + "'; skipped");
      continue;
    }
    known.push_back(std::move(v));
  }
  out.report = stage_report(classes, known, {}, 1, cfg.min_videos);
  save_videos(run.videos(), known);
  save_classes(run.classes(1), classes);
  save_classes(run.classes(), classes);
  return out;
}

SignatureMap resolve_signatures(const PipelineConfig& cfg, const RunLayout& run,
                                std::span<const SoundClass> classes, std::vector<std::string>& warnings) {
  const auto& in = cfg.inputs;
  SignatureMap signatures;
  if (!in.signatures.empty()) {
    require_input(in.signatures, cfg.resolve(in.signatures), "inputs.signatures");
    signatures = load_signatures(cfg.resolve(in.signatures));
  } else {
    require_input(in.visual_labels, cfg.resolve(in.visual_labels), "inputs.visual_labels");
    require_input(in.embeddings, cfg.resolve(in.embeddings), "inputs.embeddings");
    const auto labels = load_label_list(cfg.resolve(in.visual_labels));
    const auto table = EmbeddingTable::load(cfg.resolve(in.embeddings));
    KeywordOverrides overrides;
    if (!in.overrides.empty()) overrides = load_overrides(cfg.resolve(in.overrides));
    auto matched = match_signatures(classes, labels, table, overrides,
                                    std::min(cfg.signature_k, labels.size()));
    append(warnings, matched.warnings);
    signatures = std::move(matched.signatures);
  }
  save_signatures(run.signatures(), signatures);
  return signatures;
}

StageOutput stage2(const PipelineConfig& cfg, const RunLayout& run) {
  require(run.classes(1), 2, "stage 1 classes");
  require(run.videos(), 2, "stage 1 videos");
  require_input(cfg.inputs.frame_scores, cfg.resolve(cfg.inputs.frame_scores), "inputs.frame_scores");
  auto classes = load_classes(run.classes(1));
  const auto videos = load_videos(run.videos());
  const auto frames = load_frame_scores(cfg.resolve(cfg.inputs.frame_scores));

  StageOutput out;
  const auto signatures = resolve_signatures(cfg, run, classes, out.warnings);
  for (auto& c : classes) {
    auto it = signatures.find(c.id);
    if (it != signatures.end()) c.visual_signature = it->second;
  }
  VisualGateConfig gate;
  gate.confidence_threshold = cfg.visual_threshold;
  gate.frames_per_video = cfg.frames_per_video;
  gate.clip_half_width = cfg.clip_half_width;
  gate.max_clips_per_video = cfg.max_clips_per_video;
  auto result = run_visual_stage(classes, videos, frames, signatures, gate, cfg.min_videos);
  append(out.warnings, result.warnings);
  out.report = result.report;
  save_clips(run.clips(2), result.clips);
  save_classes(run.classes(2), classes);
  save_classes(run.classes(), classes);
  return out;
}

StageOutput stage3(const PipelineConfig& cfg, const RunLayout& run) {
  require(run.classes(2), 3, "stage 2 classes");
  require(run.clips(2), 3, "stage 2 clips");
  require_input(cfg.inputs.gate_scores, cfg.resolve(cfg.inputs.gate_scores), "inputs.gate_scores");
  auto classes = load_classes(run.classes(2));
  const auto clips = load_clips(run.clips(2));
  const auto scores = load_gate_scores(cfg.resolve(cfg.inputs.gate_scores));
  std::map<std::string, RejectionPolicy> policies;
  if (!cfg.inputs.policies.empty()) {
    policies = load_policies(cfg.resolve(cfg.inputs.policies), cfg.audio_threshold);
  }
  AudioStageConfig gate;
  gate.threshold = cfg.audio_threshold;
  gate.min_clips = cfg.min_clips;
  gate.min_videos = cfg.min_videos;
  gate.on_missing = cfg.on_missing_scores == "keep" ? MissingScores::keep : MissingScores::drop;
  auto result = run_audio_stage(classes, clips, scores, policies, gate);

  StageOutput out;
  out.warnings = result.warnings;
  out.report = result.report;
  save_clips(run.clips(3), result.clips);
  save_classes(run.classes(3), classes);
  save_classes(run.classes(), classes);
  return out;
}

std::map<std::string, Verdict> load_oracle(const fs::path& path) {
  std::map<std::string, Verdict> out;
  detail::read_jsonl(path, [&](const detail::json& j, std::size_t) {
    out[detail::field<std::string>(j, "clip_id")] =
        parse_verdict(detail::field<std::string>(j, "verdict"));
  });
  return out;
}

StageOutput stage4(const PipelineConfig& cfg, const RunLayout& run) {
  require(run.classes(3), 4, "stage 3 classes");
  require(run.clips(3), 4, "stage 3 clips");
  require_input(cfg.inputs.audio_features, cfg.resolve(cfg.inputs.audio_features),
                "inputs.audio_features");
  require_input(cfg.inputs.visual_features, cfg.resolve(cfg.inputs.visual_features),
                "inputs.visual_features");

  const auto tasks = prepare_review_round(cfg);
  const auto pending = static_cast<std::size_t>(std::count_if(
      tasks.begin(), tasks.end(), [](const ReviewTask& t) { return t.verdict == Verdict::pending; }));
  if (pending > 0) throw PendingReview(pending, run.review_tasks());

  auto classes = load_classes(run.classes(3));
  const auto videos = load_videos(run.videos());
  auto clips = load_clips(run.clips(3));

  StageOutput out;
  const auto decisions = apply_review_retention(tasks, cfg.review_min_fraction);
  for (const auto& [cls, d] : decisions) {
    if (!d.retained) {
      out.warnings.push_back("class '" + cls + "' failed review (" + std::to_string(d.correct) +
                             "/" + std::to_string(d.decided) + " correct); dropped");
    }
  }
  apply_retention_to_classes(classes, decisions);
  clips = clips_of_live_classes(clips, classes);
  for (auto& c : clips) c.provenance.add(Provenance::review_pass);

  const auto audio = to_feature_map(load_features(cfg.resolve(cfg.inputs.audio_features)));
  const auto visual = to_feature_map(load_features(cfg.resolve(cfg.inputs.visual_features)));
  const SoftmaxTrainer trainer(train_config(cfg));
  NoiseFilterConfig filter;
  filter.keep_k = cfg.top_k_keep;
  filter.mining = {cfg.mining_tau, cfg.mining_k};
  filter.dedup_threshold = cfg.dedup_threshold;
  filter.min_clips = cfg.min_clips;
  filter.min_videos = cfg.min_videos;
  filter.seed = derive_seed(cfg.seed, 4);
  auto nf = run_noise_filter(classes, clips, audio, visual, trainer, filter);
  append(out.warnings, nf.warnings);

  auto split = make_splits(nf.final_clips, {cfg.test_per_class, cfg.val_per_class},
                           derive_seed(cfg.seed, 5));
  append(out.warnings, split.warnings);
  for (auto& c : classes) {
    if (std::find(split.dropped_classes.begin(), split.dropped_classes.end(), c.id) !=
        split.dropped_classes.end()) {
      advance_status(c, ClassStatus::dropped);
    }
  }
  auto final_clips = drop_small_classes(classes, split.clips, cfg.min_clips);
  out.report = stage_report(classes, videos, final_clips, 4, cfg.min_videos);
  final_clips = clips_of_live_classes(final_clips, classes);

  const auto dir = run.filter_dir();
  save_clips(dir / "easy.jsonl", nf.easy);
  save_clips(dir / "hard.jsonl", nf.hard);
  save_clips(dir / "recovered.jsonl", nf.recovered);
  save_clips(dir / "rejected.jsonl", nf.rejected);
  save_clips(dir / "duplicates.jsonl", nf.duplicates);
  save_clips(run.clips(4), final_clips);
  save_clips(run.dataset(), final_clips);
  save_classes(run.classes(4), classes);
  save_classes(run.classes(), classes);
  return out;
}

}  // namespace

std::string run_state_json(const RunState& state) { return state_to_json(state).dump(2); }

RunState load_run_state(const std::filesystem::path& path) {
  const auto j = detail::read_json_file(path);
  RunState state;
  try {
    state.run_id = detail::field<std::string>(j, "run_id");
    state.config_hash = detail::field<std::string>(j, "config_hash");
    for (int s : detail::field<std::vector<int>>(j, "completed_stages")) state.completed_stages.insert(s);
    for (const auto& r : j.at("stage_reports")) state.stage_reports.push_back(detail::stage_report_from_json(r));
  } catch (const std::exception& e) {
    throw ManifestError(path.string(), 1, e.what());
  }
  return state;
}

void save_run_state(const std::filesystem::path& path, const RunState& state) {
  write_file_atomic(path, run_state_json(state) + "\n");
}

std::set<int> parse_stage_list(std::string_view text) {
  std::set<int> out;
  std::stringstream ss{std::string(text)};
  std::string part;
  auto number = [&](const std::string& s) {
    if (s.size() != 1 || s[0] < '1' || s[0] > '4') {
      throw InvalidArgument("bad stage '" + s + "' in '" + std::string(text) + "'; stages are 1-4");
    }
    return s[0] - '0';
  };
  while (std::getline(ss, part, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      out.insert(number(part));
      continue;
    }
    const int lo = number(part.substr(0, dash));
    const int hi = number(part.substr(dash + 1));
    if (lo > hi) throw InvalidArgument("empty stage range '" + part + "'");
    for (int s = lo; s <= hi; ++s) out.insert(s);
  }
  if (out.empty()) throw InvalidArgument("no stages given");
  return out;
}

TrainConfig train_config(const PipelineConfig& config) {
  TrainConfig t;
  t.learning_rate = config.learning_rate;
  t.max_epochs = config.max_epochs;
  t.plateau_patience = config.plateau_patience;
  t.batch_size = config.batch_size;
  t.seed = config.seed;
  return t;
}

std::vector<ReviewTask> prepare_review_round(const PipelineConfig& config) {
  const RunLayout run(config.run_path());
  std::vector<ReviewTask> tasks;
  bool changed = false;
  if (fs::exists(run.review_tasks())) {
    tasks = load_review_tasks(run.review_tasks());
  } else {
    require(run.classes(3), 4, "stage 3 classes");
    require(run.clips(3), 4, "stage 3 clips");
    const auto classes = load_classes(run.classes(3));
    const auto clips = load_clips(run.clips(3));
    for (const auto& c : classes) {
      if (c.status == ClassStatus::dropped) continue;
      std::vector<ClipRecord> own;
      std::copy_if(clips.begin(), clips.end(), std::back_inserter(own),
                   [&](const ClipRecord& r) { return r.class_id == c.id; });
      if (own.empty()) continue;
      auto sample = sample_for_review(own, c.id, config.review_sample, derive_seed(config.seed, 3));
      tasks.insert(tasks.end(), sample.begin(), sample.end());
    }
    changed = true;
  }
  if (!config.inputs.review_oracle.empty()) {
    const auto oracle = load_oracle(config.resolve(config.inputs.review_oracle));
    for (auto& t : tasks) {
      if (t.verdict != Verdict::pending) continue;
      auto it = oracle.find(t.clip_id);
      if (it == oracle.end() || it->second == Verdict::pending) continue;
      t.verdict = it->second;
      t.reviewer = "oracle";
      changed = true;
    }
  }
  if (changed) save_review_tasks(run.review_tasks(), tasks);
  return tasks;
}

PipelineResult run_pipeline(const PipelineConfig& config, const std::set<int>& stages) {
  config.validate();
  for (int s : stages) {
    if (s < 1 || s > 4) throw InvalidArgument("stage " + std::to_string(s) + " does not exist");
  }
  const RunLayout run(config.run_path());
  const auto hash = config.hash();

  PipelineResult result;
  auto& state = result.state;
  if (fs::exists(run.state())) {
    state = load_run_state(run.state());
    if (state.config_hash != hash) {
      throw ConfigMismatch("run directory '" + run.root().string() + "' was created with config " +
                           state.config_hash + ", not " + hash);
    }
  } else {
    fs::create_directories(run.root());
    state.run_id = run.root().filename().string();
    state.config_hash = hash;
    config.save(run.config());
    save_run_state(run.state(), state);
  }

  for (int stage : stages) {
    if (state.completed(stage)) continue;
    if (stage > 1 && !state.completed(stage - 1)) {
      throw MissingUpstream("stage " + std::to_string(stage) + " needs stage " +
                            std::to_string(stage - 1) + " to complete first");
    }
    StageOutput out;
    switch (stage) {
      case 1: out = stage1(config, run); break;
      case 2: out = stage2(config, run); break;
      case 3: out = stage3(config, run); break;
      default: out = stage4(config, run); break;
    }
    save_stage_report(run.report(stage), out.report);
    write_log(run.log(stage), out.warnings);
    append(result.warnings, out.warnings);
    state.completed_stages.insert(stage);
    state.stage_reports.push_back(out.report);
    save_run_state(run.state(), state);
    result.executed.push_back(stage);
  }
  return result;
}

std::string tree_digest(const std::filesystem::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
  }
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) {
    std::ifstream in(root / f, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    all += f.generic_string();
    all.push_back('\0');
    all += std::to_string(ss.str().size());
    all.push_back('\0');
    all += ss.str();
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(all)));
  return buf;
}

}  // namespace curator
