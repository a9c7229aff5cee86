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

#include "curator/noise_filter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "curator/audio_stage.hpp"
#include "json_util.hpp"

namespace curator {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31U);
}

std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

// Score vector of `scorer` re-ordered to `universe`; classes the model does not
// know score 0.
std::vector<double> aligned_scores(const Scorer& scorer, const FeatureVector& feature,
                                   const std::vector<std::string>& universe) {
  const auto raw = scorer.score(feature);
  const auto& ids = scorer.class_ids();
  std::vector<double> out(universe.size(), 0.0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = std::lower_bound(universe.begin(), universe.end(), ids[i]);
    if (it != universe.end() && *it == ids[i]) out[static_cast<std::size_t>(it - universe.begin())] = raw[i];
  }
  return out;
}

struct TrainedFold {
  std::unique_ptr<Scorer> model;
  FoldRecord record;
};

TrainedFold train_fold(std::span<const ClipRecord* const> train_clips, const FeatureMap& features,
                       const ClassifierTrainer& trainer, std::uint64_t seed) {
  std::vector<LabeledExample> examples;
  examples.reserve(train_clips.size());
  TrainedFold fold;
  for (const ClipRecord* c : train_clips) {
    examples.push_back({FeatureVector{c->clip_id, features.at(c->clip_id)}, c->class_id});
    fold.record.train_ids.insert(c->clip_id);
  }
  fold.model = trainer.train(examples, seed);
  return fold;
}

// Held-out scoring with membership bookkeeping.
std::vector<double> score_held_out(TrainedFold& fold, const ClipRecord& clip,
                                   const FeatureMap& features,
                                   const std::vector<std::string>& universe) {
  if (fold.record.train_ids.contains(clip.clip_id)) {
    throw std::logic_error("clip '" + clip.clip_id + "' scored by a model that trained on it");
  }
  fold.record.scored_ids.push_back(clip.clip_id);
  return aligned_scores(*fold.model, FeatureVector{clip.clip_id, features.at(clip.clip_id)},
                        universe);
}

bool in_top_k(std::span<const double> scores, const std::vector<std::string>& universe,
              const std::string& class_id, std::size_t keep_k) {
  const auto best = top_k(scores, universe, std::min(keep_k, universe.size()));
  return std::find(best.begin(), best.end(), class_id) != best.end();
}

}  // namespace

// --- review ----------------------------------------------------------------

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::pending: return "pending";
    case Verdict::correct: return "correct";
    case Verdict::incorrect: return "incorrect";
  }
  return "pending";
}

Verdict parse_verdict(std::string_view text) {
  if (text == "pending") return Verdict::pending;
  if (text == "correct") return Verdict::correct;
  if (text == "incorrect") return Verdict::incorrect;
  throw InvalidArgument("unknown verdict '" + std::string(text) + "'");
}

std::vector<ReviewTask> sample_for_review(std::span<const ClipRecord> clips,
                                          const std::string& class_id, std::size_t n,
                                          std::uint64_t seed) {
  std::vector<std::string> pool;
  for (const auto& c : clips) {
    if (c.class_id == class_id) pool.push_back(c.clip_id);
  }
  if (pool.empty()) throw InvalidArgument("class '" + class_id + "' has no clips to review");
  std::sort(pool.begin(), pool.end());

  std::mt19937_64 rng(derive_seed(seed, fnv1a(class_id)));
  const std::size_t take = std::min(n, pool.size());
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }

  std::vector<ReviewTask> tasks;
  tasks.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    ReviewTask t;
    t.task_id = class_id + "/" + std::to_string(i);
    t.class_id = class_id;
    t.clip_id = pool[i];
    tasks.push_back(std::move(t));
  }
  return tasks;
}

std::map<std::string, RetentionDecision> apply_review_retention(std::span<const ReviewTask> tasks,
                                                                double min_fraction) {
  std::map<std::string, RetentionDecision> out;
  std::size_t pending = 0;
  for (const auto& t : tasks) {
    if (t.verdict == Verdict::pending) {
      ++pending;
      continue;
    }
    auto& d = out[t.class_id];
    ++d.decided;
    if (t.verdict == Verdict::correct) ++d.correct;
  }
  if (pending > 0) {
    throw UndecidedTasks(std::to_string(pending) + " review tasks are still pending");
  }
  for (auto& [cls, d] : out) {
    d.fraction = static_cast<double>(d.correct) / static_cast<double>(d.decided);
    d.retained = static_cast<double>(d.correct) >= min_fraction * static_cast<double>(d.decided);
  }
  return out;
}

void apply_retention_to_classes(std::span<SoundClass> classes,
                                const std::map<std::string, RetentionDecision>& decisions) {
  for (auto& c : classes) {
    if (c.status == ClassStatus::dropped) continue;
    auto it = decisions.find(c.id);
    if (it != decisions.end() && !it->second.retained) advance_status(c, ClassStatus::dropped);
  }
}

std::vector<ReviewTask> load_review_tasks(const std::filesystem::path& path) {
  std::vector<ReviewTask> out;
  std::unordered_set<std::string> seen;
  std::set<std::pair<std::string, std::string>> pairs;
  detail::read_jsonl(path, [&](const detail::json& j, std::size_t line) {
    ReviewTask t;
    t.task_id = detail::field<std::string>(j, "task_id");
    t.class_id = detail::field<std::string>(j, "class_id");
    t.clip_id = detail::field<std::string>(j, "clip_id");
    t.verdict = parse_verdict(detail::field_or<std::string>(j, "verdict", "pending"));
    t.reviewer = detail::field_or<std::string>(j, "reviewer", "");
    t.decided_at = detail::field_or<std::int64_t>(j, "decided_at", 0);
    if (!seen.insert(t.task_id).second) {
      throw ManifestError(path.string(), line, "duplicate id '" + t.task_id + "'");
    }
    if (!pairs.insert({t.class_id, t.clip_id}).second) {
      throw ManifestError(path.string(), line, "second task for clip '" + t.clip_id + "'");
    }
    out.push_back(std::move(t));
  });
  return out;
}

void save_review_tasks(const std::filesystem::path& path, std::span<const ReviewTask> tasks) {
  detail::save_records(path, tasks, [](const ReviewTask& t) {
    return detail::json{{"task_id", t.task_id},     {"class_id", t.class_id},
                        {"clip_id", t.clip_id},     {"verdict", to_string(t.verdict)},
                        {"reviewer", t.reviewer},   {"decided_at", t.decided_at}};
  });
}

// --- ensemble --------------------------------------------------------------

FeatureMap to_feature_map(std::span<const FeatureVector> features) {
  FeatureMap out;
  out.reserve(features.size());
  for (const auto& f : features) out.emplace(f.clip_id, f.values);
  return out;
}

EnsembleResult two_split_ensemble_filter(std::span<const ClipRecord> clips,
                                         const FeatureMap& features,
                                         const ClassifierTrainer& trainer, std::uint64_t seed,
                                         std::size_t keep_k) {
  EnsembleResult result;

  // class -> video -> clips (featured clips only)
  std::map<std::string, std::map<std::string, std::vector<const ClipRecord*>>> by_class;
  std::unordered_set<std::string> unusable;
  for (const auto& c : clips) {
    if (!features.contains(c.clip_id)) {
      result.warnings.push_back("clip '" + c.clip_id + "' has no audio feature");
      unusable.insert(c.clip_id);
      continue;
    }
    by_class[c.class_id][c.video_id].push_back(&c);
  }
  for (auto it = by_class.begin(); it != by_class.end();) {
    if (it->second.size() < 2) {
      result.warnings.push_back("class '" + it->first + "' has fewer than two videos; not split");
      for (const auto& [video, members] : it->second) {
        for (const auto* c : members) unusable.insert(c->clip_id);
      }
      it = by_class.erase(it);
    } else {
      ++it;
    }
  }
  for (const auto& [cls, videos] : by_class) result.class_ids.push_back(cls);
  if (result.class_ids.size() < 2) {
    if (!by_class.empty()) result.warnings.push_back("fewer than two splittable classes; nothing scored");
    result.rejected.assign(clips.begin(), clips.end());
    return result;
  }

  std::unordered_map<std::string, EnsemblePrediction> predictions;
  for (std::uint64_t round = 0; round < 2; ++round) {
    std::mt19937_64 rng(derive_seed(seed, round));
    std::vector<const ClipRecord*> halves[2];
    for (const auto& [cls, videos] : by_class) {
      std::vector<const std::vector<const ClipRecord*>*> order;
      for (const auto& [video, members] : videos) order.push_back(&members);
      std::shuffle(order.begin(), order.end(), rng);
      const std::size_t first_half = (order.size() + 1) / 2;
      for (std::size_t i = 0; i < order.size(); ++i) {
        auto& half = halves[i < first_half ? 0 : 1];
        half.insert(half.end(), order[i]->begin(), order[i]->end());
      }
    }

    auto train_half = [&](int h) {
      return train_fold(halves[h], features, trainer, derive_seed(seed, 16 + 2 * round + h));
    };
    auto pending = std::async(std::launch::async, train_half, 1);
    TrainedFold folds[2] = {train_half(0), pending.get()};

    for (int h = 0; h < 2; ++h) {
      auto& fold = folds[h];
      for (const ClipRecord* c : halves[1 - h]) {
        auto& p = predictions[c->clip_id];
        p.clip_id = c->clip_id;
        p.fold_scores.push_back(score_held_out(fold, *c, features, result.class_ids));
      }
      result.folds.push_back(std::move(fold.record));
    }
  }

  for (const auto& c : clips) {
    auto it = predictions.find(c.clip_id);
    if (unusable.contains(c.clip_id) || it == predictions.end()) {
      result.rejected.push_back(c);
      continue;
    }
    auto& p = it->second;
    p.mean_scores.assign(result.class_ids.size(), 0.0);
    for (const auto& fs : p.fold_scores) {
      for (std::size_t i = 0; i < fs.size(); ++i) p.mean_scores[i] += fs[i];
    }
    for (double& v : p.mean_scores) v /= static_cast<double>(p.fold_scores.size());
    p.top3 = top_k(p.mean_scores, result.class_ids, std::min<std::size_t>(3, result.class_ids.size()));
    if (in_top_k(p.mean_scores, result.class_ids, c.class_id, keep_k)) {
      auto easy = c;
      easy.provenance.add(Provenance::ensemble_easy);
      result.easy.push_back(std::move(easy));
    } else {
      result.rejected.push_back(c);
    }
    result.predictions.push_back(std::move(p));
  }
  return result;
}

// --- mining ----------------------------------------------------------------

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("feature dimensions differ");
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

MiningResult mine_hard_positives(std::span<const ClipRecord> easy,
                                 std::span<const ClipRecord> rejected,
                                 const FeatureMap& visual_features, const MiningConfig& cfg) {
  MiningResult result;
  std::unordered_map<std::string, std::vector<const std::vector<double>*>> positives;
  for (const auto& c : easy) {
    auto f = visual_features.find(c.clip_id);
    if (f == visual_features.end()) {
      result.warnings.push_back("easy positive '" + c.clip_id + "' has no visual feature");
      continue;
    }
    positives[c.class_id].push_back(&f->second);
  }

  std::vector<double> sims;
  for (const auto& r : rejected) {
    auto f = visual_features.find(r.clip_id);
    if (f == visual_features.end()) {
      result.warnings.push_back("rejected clip '" + r.clip_id + "' has no visual feature");
      result.rejected.push_back(r);
      continue;
    }
    auto pos = positives.find(r.class_id);
    if (pos == positives.end() || cfg.k == 0) {
      result.rejected.push_back(r);
      continue;
    }
    sims.clear();
    for (const auto* p : pos->second) sims.push_back(cosine_similarity(f->second, *p));
    const auto k = std::min(cfg.k, sims.size());
    std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), sims.end(),
                      std::greater<>());
    const double best = *std::max_element(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k));
    result.best_similarity[r.clip_id] = best;
    if (best >= cfg.tau) {
      auto hard = r;
      hard.provenance.add(Provenance::mined_hard);
      result.hard.push_back(std::move(hard));
    } else {
      result.rejected.push_back(r);
    }
  }
  return result;
}

// --- final retrieval -------------------------------------------------------

RetrievalResult final_retrieval(std::span<const ClipRecord> kept,
                                std::span<const ClipRecord> rejected, const FeatureMap& features,
                                const ClassifierTrainer& trainer, std::uint64_t seed,
                                std::size_t keep_k) {
  RetrievalResult result;
  if (rejected.empty()) return result;

  std::vector<const ClipRecord*> train_clips;
  std::set<std::string> class_set;
  for (const auto& c : kept) {
    if (!features.contains(c.clip_id)) {
      result.warnings.push_back("kept clip '" + c.clip_id + "' has no audio feature");
      continue;
    }
    train_clips.push_back(&c);
    class_set.insert(c.class_id);
  }
  if (class_set.size() < 2) {
    result.warnings.push_back("fewer than two classes to train the retrieval model; nothing recovered");
    result.rejected.assign(rejected.begin(), rejected.end());
    return result;
  }
  const std::vector<std::string> universe(class_set.begin(), class_set.end());

  auto fold = train_fold(train_clips, features, trainer, derive_seed(seed, 64));
  for (const auto& r : rejected) {
    if (!class_set.contains(r.class_id) || !features.contains(r.clip_id)) {
      result.rejected.push_back(r);
      continue;
    }
    const auto scores = score_held_out(fold, r, features, universe);
    if (in_top_k(scores, universe, r.class_id, keep_k)) {
      auto rec = r;
      rec.provenance.add(Provenance::final_retrieved);
      result.recovered.push_back(std::move(rec));
    } else {
      result.rejected.push_back(r);
    }
  }
  result.fold = std::move(fold.record);
  return result;
}

// --- deduplication ---------------------------------------------------------

std::vector<ClipRecord> deduplicate(std::span<const ClipRecord> clips,
                                    const FeatureMap& visual_features, double sim_threshold,
                                    std::vector<ClipRecord>* removed) {
  std::vector<std::size_t> parent(clips.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };

  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (visual_features.contains(clips[i].clip_id)) by_class[clips[i].class_id].push_back(i);
  }
  for (const auto& [cls, members] : by_class) {
    for (std::size_t a = 0; a < members.size(); ++a) {
      const auto& fa = visual_features.at(clips[members[a]].clip_id);
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const auto& fb = visual_features.at(clips[members[b]].clip_id);
        if (cosine_similarity(fa, fb) >= sim_threshold) {
          const auto ra = find(members[a]);
          const auto rb = find(members[b]);
          if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
        }
      }
    }
  }

  // Representative of each component: its lowest clip_id.
  std::unordered_map<std::size_t, std::size_t> representative;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const auto root = find(i);
    auto [it, inserted] = representative.emplace(root, i);
    if (!inserted && clips[i].clip_id < clips[it->second].clip_id) it->second = i;
  }
  std::vector<ClipRecord> out;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (representative.at(find(i)) == i) {
      out.push_back(clips[i]);
    } else if (removed != nullptr) {
      removed->push_back(clips[i]);
    }
  }
  return out;
}

bool is_partition(std::span<const ClipRecord> input,
                  std::span<const std::span<const ClipRecord>> parts) {
  std::unordered_set<std::string> seen;
  std::size_t total = 0;
  for (const auto& part : parts) {
    for (const auto& c : part) {
      if (!seen.insert(c.clip_id).second) return false;
      ++total;
    }
  }
  if (total != input.size()) return false;
  return std::all_of(input.begin(), input.end(),
                     [&](const ClipRecord& c) { return seen.contains(c.clip_id); });
}

// --- stage -----------------------------------------------------------------

NoiseFilterResult run_noise_filter(std::span<SoundClass> classes, std::span<const ClipRecord> clips,
                                   const FeatureMap& audio_features,
                                   const FeatureMap& visual_features,
                                   const ClassifierTrainer& trainer, const NoiseFilterConfig& cfg) {
  NoiseFilterResult result;
  const auto input = clips_of_live_classes(clips, classes);

  auto ensemble = two_split_ensemble_filter(input, audio_features, trainer, cfg.seed, cfg.keep_k);
  auto mining = mine_hard_positives(ensemble.easy, ensemble.rejected, visual_features, cfg.mining);

  std::vector<ClipRecord> kept = ensemble.easy;
  kept.insert(kept.end(), mining.hard.begin(), mining.hard.end());
  auto retrieval = final_retrieval(kept, mining.rejected, audio_features, trainer,
                                   derive_seed(cfg.seed, 7), cfg.keep_k);

  result.easy = std::move(ensemble.easy);
  result.hard = std::move(mining.hard);
  result.recovered = std::move(retrieval.recovered);
  result.rejected = std::move(retrieval.rejected);
  result.folds = std::move(ensemble.folds);
  if (!retrieval.fold.train_ids.empty()) result.folds.push_back(std::move(retrieval.fold));
  for (auto* w : {&ensemble.warnings, &mining.warnings, &retrieval.warnings}) {
    result.warnings.insert(result.warnings.end(), w->begin(), w->end());
  }

  // Survivors in input order, carrying their updated provenance.
  std::unordered_map<std::string, const ClipRecord*> survivor;
  for (const auto* part : {&result.easy, &result.hard, &result.recovered}) {
    for (const auto& c : *part) survivor.emplace(c.clip_id, &c);
  }
  std::vector<ClipRecord> kept_all;
  for (const auto& c : input) {
    if (auto it = survivor.find(c.clip_id); it != survivor.end()) kept_all.push_back(*it->second);
  }

  auto unique = deduplicate(kept_all, visual_features, cfg.dedup_threshold, &result.duplicates);
  unique = drop_small_classes(classes, unique, cfg.min_clips);
  result.report = stage_report(classes, {}, unique, 4, cfg.min_videos);
  for (auto& c : classes) {
    if (c.status != ClassStatus::dropped) advance_status(c, ClassStatus::retained);
  }
  result.final_clips = clips_of_live_classes(unique, classes);
  return result;
}

}  // namespace curator
