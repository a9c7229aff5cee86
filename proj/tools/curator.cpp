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

#include <csignal>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "curator/audio_stage.hpp"
#include "curator/classifier.hpp"
#include "curator/config.hpp"
#include "curator/corpus.hpp"
#include "curator/dsp.hpp"
#include "curator/fixture.hpp"
#include "curator/metrics.hpp"
#include "curator/noise_filter.hpp"
#include "curator/pipeline.hpp"
#include "curator/query_expansion.hpp"
#include "curator/review_service.hpp"
#include "curator/signature_matcher.hpp"
#include "curator/splits.hpp"
#include "curator/visual_stage.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace curator;

namespace {

json report_json(const StageReport& r) {
  return {{"stage", r.stage},
          {"classes_remaining", r.classes_remaining},
          {"videos_remaining", r.videos_remaining},
          {"clips_remaining", r.clips_remaining}};
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// Classes named by a manifest when given, otherwise stubs for every class id
// seen in `ids`.
std::vector<SoundClass> classes_or_stubs(const std::string& path, const std::set<std::string>& ids) {
  if (!path.empty()) return load_classes(path);
  std::vector<SoundClass> out;
  for (const auto& id : ids) {
    SoundClass c;
    c.id = id;
    c.display_label = id;
    out.push_back(c);
  }
  return out;
}

void advance_all(std::vector<SoundClass>& classes, ClassStatus to) {
  for (auto& c : classes) {
    if (c.status != ClassStatus::dropped && c.status != to && can_transition(c.status, to)) {
      advance_status(c, to);
    }
  }
}

ReviewService* g_service = nullptr;

extern "C" void on_signal(int) {
  if (g_service != nullptr) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curator: audio-visual dataset curation pipeline"};
  app.require_subcommand(1);

  // expand
  auto* expand = app.add_subcommand("expand", "Expand class labels into search-query variants");
  std::string ex_classes, ex_out, ex_verbs;
  std::vector<std::string> ex_lexicons;
  expand->add_option("--classes", ex_classes, "Class manifest (JSON lines)")->required();
  expand->add_option("--lexicon", ex_lexicons, "Synonym or translation lexicon (repeatable)");
  expand->add_option("--verbs", ex_verbs, "Verb table replacing the built-in one");
  expand->add_option("--out", ex_out, "Query manifest to write")->required();
  expand->callback([&] {
    const auto classes = load_classes(ex_classes);
    std::vector<Lexicon> lexicons;
    for (const auto& l : ex_lexicons) lexicons.push_back(Lexicon::load(l));
    const auto verbs = ex_verbs.empty() ? VerbTable::builtin() : VerbTable::load(ex_verbs);
    std::vector<QueryVariant> all;
    for (const auto& c : classes) {
      auto v = expand_queries(c, lexicons, verbs);
      all.insert(all.end(), v.begin(), v.end());
    }
    std::cout << emit_query_manifest(all, ex_out) << " queries written to " << ex_out << "\n";
  });

  // match
  auto* match = app.add_subcommand("match", "Build visual signatures from label embeddings");
  std::string m_sound, m_visual, m_embed, m_over, m_out, m_propose;
  std::size_t m_k = 20;
  match->add_option("--sound-classes", m_sound, "Class manifest (JSON lines)")->required();
  match->add_option("--visual-classes", m_visual, "Visual label list, one per line")->required();
  match->add_option("--embeddings", m_embed, "Token embedding table")->required();
  match->add_option("--overrides", m_over, "Keyword override map (JSON)");
  match->add_option("--k", m_k, "Signature length")->check(CLI::PositiveNumber);
  match->add_option("--propose-overrides", m_propose, "Also write proposed keyword overrides here");
  match->add_option("--out", m_out, "Signature manifest to write")->required();
  match->callback([&] {
    const auto classes = load_classes(m_sound);
    const auto labels = load_label_list(m_visual);
    const auto table = EmbeddingTable::load(m_embed);
    const auto overrides = m_over.empty() ? KeywordOverrides{} : load_overrides(m_over);
    auto result = match_signatures(classes, labels, table, overrides, m_k);
    print_warnings(result.warnings);
    save_signatures(m_out, result.signatures);
    if (!m_propose.empty()) {
      std::vector<std::string> sound;
      for (const auto& c : classes) sound.push_back(c.display_label);
      save_overrides(m_propose, propose_keyword_overrides(sound, labels));
    }
    std::cout << result.signatures.size() << " signatures written to " << m_out << "\n";
  });

  // visual
  auto* visual = app.add_subcommand("visual", "Stage 2: carve clips around visual anchor frames");
  std::string v_videos, v_scores, v_sigs, v_out, v_classes;
  VisualGateConfig v_cfg;
  std::size_t v_min_videos = 100;
  visual->add_option("--videos", v_videos, "Video manifest")->required();
  visual->add_option("--scores", v_scores, "Frame-score manifest")->required();
  visual->add_option("--signatures", v_sigs, "Signature manifest")->required();
  visual->add_option("--classes", v_classes, "Class manifest (defaults to the videos' class ids)");
  visual->add_option("--threshold", v_cfg.confidence_threshold, "Anchor confidence threshold");
  visual->add_option("--frames-per-video", v_cfg.frames_per_video);
  visual->add_option("--max-clips-per-video", v_cfg.max_clips_per_video);
  visual->add_option("--min-videos", v_min_videos, "Classes with fewer videos are dropped");
  visual->add_option("--out", v_out, "Clip manifest to write")->required();
  visual->callback([&] {
    const auto videos = load_videos(v_videos);
    std::set<std::string> ids;
    for (const auto& v : videos) ids.insert(v.class_id);
    auto classes = classes_or_stubs(v_classes, ids);
    const auto result = run_visual_stage(classes, videos, load_frame_scores(v_scores),
                                         load_signatures(v_sigs), v_cfg, v_min_videos);
    print_warnings(result.warnings);
    save_clips(v_out, result.clips);
    std::cout << report_json(result.report).dump() << "\n";
  });

  // audio
  auto* audio = app.add_subcommand("audio", "Stage 3: reject clips dominated by speech or music");
  std::string a_clips, a_scores, a_policies, a_out, a_classes, a_missing = "drop";
  AudioStageConfig a_cfg;
  audio->add_option("--clips", a_clips, "Clip manifest")->required();
  audio->add_option("--scores", a_scores, "Speech/music/other score manifest")->required();
  audio->add_option("--policies", a_policies, "Per-class rejection policies (JSON lines)");
  audio->add_option("--classes", a_classes, "Class manifest (defaults to the clips' class ids)");
  audio->add_option("--threshold", a_cfg.threshold, "Rejection threshold");
  audio->add_option("--on-missing", a_missing, "Clips without scores")->check(CLI::IsMember({"keep", "drop"}));
  audio->add_option("--min-clips", a_cfg.min_clips);
  audio->add_option("--min-videos", a_cfg.min_videos);
  audio->add_option("--out", a_out, "Clip manifest to write")->required();
  audio->callback([&] {
    const auto clips = load_clips(a_clips);
    std::set<std::string> ids;
    for (const auto& c : clips) ids.insert(c.class_id);
    auto classes = classes_or_stubs(a_classes, ids);
    advance_all(classes, ClassStatus::visually_verified);
    const auto policies = a_policies.empty() ? std::map<std::string, RejectionPolicy>{}
                                             : load_policies(a_policies, a_cfg.threshold);
    a_cfg.on_missing = a_missing == "keep" ? MissingScores::keep : MissingScores::drop;
    const auto result = run_audio_stage(classes, clips, load_gate_scores(a_scores), policies, a_cfg);
    print_warnings(result.warnings);
    save_clips(a_out, result.clips);
    std::cout << report_json(result.report).dump() << "\n";
  });

  // filter
  auto* filter = app.add_subcommand("filter", "Stage 4: ensemble filtering, mining, retrieval, dedup");
  std::string f_clips, f_features, f_visual, f_out;
  std::uint64_t f_seed = 0;
  NoiseFilterConfig f_cfg;
  TrainConfig f_train;
  filter->add_option("--clips", f_clips, "Clip manifest of reviewed classes")->required();
  filter->add_option("--features", f_features, "Audio feature manifest")->required();
  filter->add_option("--visual-features", f_visual, "Visual feature manifest (defaults to --features)");
  filter->add_option("--seed", f_seed);
  filter->add_option("--tau", f_cfg.mining.tau, "Hard-positive similarity threshold");
  filter->add_option("--mining-k", f_cfg.mining.k);
  filter->add_option("--keep-k", f_cfg.keep_k);
  filter->add_option("--dedup", f_cfg.dedup_threshold, "Duplicate similarity threshold");
  filter->add_option("--min-clips", f_cfg.min_clips);
  filter->add_option("--min-videos", f_cfg.min_videos);
  filter->add_option("--learning-rate", f_train.learning_rate);
  filter->add_option("--max-epochs", f_train.max_epochs);
  filter->add_option("--out-dir", f_out, "Directory for easy/hard/recovered/rejected manifests")->required();
  filter->callback([&] {
    const auto clips = load_clips(f_clips);
    std::set<std::string> ids;
    for (const auto& c : clips) ids.insert(c.class_id);
    auto classes = classes_or_stubs("", ids);
    advance_all(classes, ClassStatus::audio_verified);
    const auto audio_fm = to_feature_map(load_features(f_features));
    const auto visual_fm = f_visual.empty() ? audio_fm : to_feature_map(load_features(f_visual));
    f_cfg.seed = f_seed;
    f_train.seed = f_seed;
    const SoftmaxTrainer trainer(f_train);
    const auto r = run_noise_filter(classes, clips, audio_fm, visual_fm, trainer, f_cfg);
    print_warnings(r.warnings);
    fs::create_directories(f_out);
    save_clips(fs::path(f_out) / "easy.jsonl", r.easy);
    save_clips(fs::path(f_out) / "hard.jsonl", r.hard);
    save_clips(fs::path(f_out) / "recovered.jsonl", r.recovered);
    save_clips(fs::path(f_out) / "rejected.jsonl", r.rejected);
    save_clips(fs::path(f_out) / "duplicates.jsonl", r.duplicates);
    save_clips(fs::path(f_out) / "final.jsonl", r.final_clips);
    std::cout << json{{"easy", r.easy.size()},
                      {"hard", r.hard.size()},
                      {"recovered", r.recovered.size()},
                      {"rejected", r.rejected.size()},
                      {"duplicates", r.duplicates.size()},
                      {"report", report_json(r.report)}}
                     .dump()
              << "\n";
  });

  // spectrogram
  auto* spec = app.add_subcommand("spectrogram", "Log-magnitude STFT of a mono 16 kHz WAV file");
  std::string s_in, s_out;
  double s_seconds = 0.0;
  std::uint64_t s_seed = 0;
  spec->add_option("--in", s_in, "Input WAV")->required();
  spec->add_option("--seconds", s_seconds, "Random crop length; 0 keeps the whole clip");
  spec->add_option("--seed", s_seed, "Crop offset seed");
  spec->add_option("--out", s_out, "Binary spectrogram to write")->required();
  spec->callback([&] {
    auto buffer = dsp::read_wav(s_in);
    dsp::StftOptions opts;
    if (s_seconds > 0.0) {
      buffer = dsp::crop_audio(buffer, s_seconds, dsp::CropMode::random(s_seed));
    }
    // 100 frames per second of audio at the default hop.
    opts.target_frames = static_cast<std::size_t>(std::llround(buffer.duration() * buffer.sample_rate /
                                                                static_cast<double>(opts.hop)));
    const auto s = dsp::stft_spectrogram(buffer, opts);
    dsp::write_spectrogram(s_out, s.values);
    std::cout << s.bins() << " x " << s.frames() << " written to " << s_out << "\n";
  });

  // train / predict
  auto* train_cmd = app.add_subcommand("train", "Train the baseline linear-softmax classifier");
  std::string t_features, t_clips, t_out;
  TrainConfig t_cfg;
  train_cmd->add_option("--features", t_features, "Feature manifest")->required();
  train_cmd->add_option("--clips", t_clips, "Clip manifest giving each clip's class")->required();
  train_cmd->add_option("--seed", t_cfg.seed);
  train_cmd->add_option("--learning-rate", t_cfg.learning_rate);
  train_cmd->add_option("--max-epochs", t_cfg.max_epochs);
  train_cmd->add_option("--batch-size", t_cfg.batch_size);
  train_cmd->add_option("--out", t_out, "Model JSON to write")->required();
  train_cmd->callback([&] {
    const auto fm = to_feature_map(load_features(t_features));
    std::vector<LabeledExample> examples;
    for (const auto& c : load_clips(t_clips)) {
      auto it = fm.find(c.clip_id);
      if (it == fm.end()) {
        std::cerr << "warning: no feature for clip '" << c.clip_id << "'\n";
        continue;
      }
      examples.push_back({{c.clip_id, it->second}, c.class_id});
    }
    const auto model = train(examples, t_cfg);
    model.save(t_out);
    const auto& log = model.train_log();
    std::cout << examples.size() << " examples, " << log.size() << " epochs";
    if (!log.empty()) std::cout << ", final val loss " << log.back().val_loss;
    std::cout << "\n";
  });

  auto* predict_cmd = app.add_subcommand("predict", "Score features with a trained model");
  std::string p_model, p_features, p_out;
  predict_cmd->add_option("--model", p_model, "Model JSON")->required();
  predict_cmd->add_option("--features", p_features, "Feature manifest")->required();
  predict_cmd->add_option("--out", p_out, "Prediction manifest to write")->required();
  predict_cmd->callback([&] {
    const auto model = LinearSoftmaxModel::load(p_model);
    std::vector<ScoreRecord> out;
    for (const auto& f : load_features(p_features)) {
      const auto s = predict(model, f);
      ScoreRecord r{f.clip_id, {}};
      for (std::size_t i = 0; i < s.size(); ++i) r.scores[model.class_ids()[i]] = s[i];
      out.push_back(std::move(r));
    }
    save_scores(p_out, out);
    std::cout << out.size() << " predictions written to " << p_out << "\n";
  });

  // eval
  auto* eval = app.add_subcommand("eval", "mAP, AUC, d-prime and top-k accuracy");
  std::string e_pred, e_truth, e_out;
  eval->add_option("--predictions", e_pred, "Prediction manifest")->required();
  eval->add_option("--truth", e_truth, "Truth manifest {clip_id, class_id}")->required();
  eval->add_option("--out", e_out, "Report JSON to write")->required();
  eval->callback([&] {
    const auto report = metrics::evaluate(metrics::load_predictions(e_pred), metrics::load_truth(e_truth));
    metrics::save_report(e_out, report);
    auto show = [](const std::optional<double>& v) { return v ? std::to_string(*v) : std::string("n/a"); };
    std::cout << "mAP " << show(report.map) << "  AUC " << show(report.auc) << "  d' "
              << show(report.d_prime) << "  top1 " << report.top1 << "  top5 " << report.top5 << "\n";
  });

  // run
  auto* run = app.add_subcommand("run", "Run pipeline stages under a config");
  std::string r_config, r_stages = "1-4";
  run->add_option("--config", r_config, "Pipeline config (TOML)")->required();
  run->add_option("--stages", r_stages, "Stages, e.g. 1-4 or 2,3");
  run->callback([&] {
    const auto cfg = PipelineConfig::load(r_config);
    try {
      const auto result = run_pipeline(cfg, parse_stage_list(r_stages));
      print_warnings(result.warnings);
      for (const auto& r : result.state.stage_reports) std::cout << report_json(r).dump() << "\n";
    } catch (const PendingReview& e) {
      std::cerr << e.what() << "\n";
      throw CLI::RuntimeError(3);
    }
  });

  // split
  auto* split = app.add_subcommand("split", "Assign video-disjoint train/val/test splits");
  std::string sp_clips, sp_out;
  std::uint64_t sp_seed = 0;
  SplitConfig sp_cfg;
  split->add_option("--clips", sp_clips, "Clip manifest")->required();
  split->add_option("--seed", sp_seed);
  split->add_option("--test", sp_cfg.test_per_class);
  split->add_option("--val", sp_cfg.val_per_class);
  split->add_option("--out", sp_out, "Clip manifest to write (defaults to <clips>.split.jsonl)");
  split->callback([&] {
    const auto result = make_splits(load_clips(sp_clips), sp_cfg, sp_seed);
    print_warnings(result.warnings);
    if (sp_out.empty()) {
      const fs::path in(sp_clips);
      sp_out = (in.parent_path() / (in.stem().string() + ".split.jsonl")).string();
    }
    save_clips(sp_out, result.clips);
    std::size_t counts[4] = {0, 0, 0, 0};
    for (const auto& c : result.clips) ++counts[static_cast<int>(c.split)];
    std::cout << json{{"train", counts[1]}, {"val", counts[2]}, {"test", counts[3]},
                      {"dropped_classes", result.dropped_classes}, {"out", sp_out}}
                     .dump()
              << "\n";
  });

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the review API for the pending round");
  std::string sv_config, sv_bind = "127.0.0.1:8080", sv_ui;
  serve->add_option("--config", sv_config, "Pipeline config (TOML)")->required();
  serve->add_option("--bind", sv_bind, "host:port");
  serve->add_option("--ui-dir", sv_ui, "Built review UI assets");
  serve->callback([&] {
    const auto cfg = PipelineConfig::load(sv_config);
    const RunLayout layout(cfg.run_path());
    const auto tasks = prepare_review_round(cfg);
    if (tasks.empty()) throw CuratorError("no review round: stage 3 left no classes to review");
    const auto colon = sv_bind.rfind(':');
    if (colon == std::string::npos) throw InvalidArgument("--bind must be host:port");
    const auto host = sv_bind.substr(0, colon);
    const int port = std::stoi(sv_bind.substr(colon + 1));

    ReviewStore store(layout.review_tasks(), cfg.review_min_fraction, cfg.lease_seconds);
    ServiceOptions opts;
    opts.media_dir = cfg.resolve(cfg.inputs.media_dir);
    opts.ui_dir = sv_ui;
    opts.run_state = layout.state();
    ReviewService service(store, opts);
    const int bound = service.bind(host, port);
    g_service = &service;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "serving " << store.pending() << " pending tasks on http://" << host << ":" << bound << "\n";
    service.run();
    g_service = nullptr;
  });

  // synth
  auto* synth = app.add_subcommand("synth", "Write the synthetic fixture corpus");
  std::string sy_out;
  FixtureSpec sy_spec;
  synth->add_option("--out-dir", sy_out, "Directory to create")->required();
  synth->add_option("--seed", sy_spec.seed);
  synth->add_option("--classes", sy_spec.classes);
  synth->callback([&] {
    const auto s = write_fixture(sy_out, sy_spec);
    std::cout << "fixture written; run: curator run --config " << s.config.string() << " --stages 1-4\n"
              << s.stage4_clips << " clips reach stage 4 at purity " << s.stage4_purity << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ManifestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
