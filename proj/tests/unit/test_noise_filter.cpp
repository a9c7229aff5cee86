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
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "curator/noise_filter.hpp"
#include "test_support.hpp"

namespace curator {
namespace {

using testing::clip;

std::vector<ClipRecord> class_clips(const std::string& cls, std::size_t n) {
  std::vector<ClipRecord> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(clip(cls + "_v" + std::to_string(i), cls, 0.0));
  return out;
}

ReviewTask decided(const std::string& cls, int i, bool correct) {
  ReviewTask t;
  t.task_id = cls + "/" + std::to_string(i);
  t.class_id = cls;
  t.clip_id = cls + ":" + std::to_string(i);
  t.verdict = correct ? Verdict::correct : Verdict::incorrect;
  return t;
}

std::set<std::string> ids_of(std::span<const ClipRecord> clips) {
  std::set<std::string> out;
  for (const auto& c : clips) out.insert(c.clip_id);
  return out;
}

std::vector<double> unit(std::size_t dim, std::size_t axis) {
  std::vector<double> v(dim, 0.0);
  v[axis] = 1.0;
  return v;
}

TrainConfig fast_config() {
  TrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.max_epochs = 60;
  return cfg;
}

TEST(Review, SampleSizesAndDeterminism) {
  const auto big = class_clips("a", 500);
  const auto tasks = sample_for_review(big, "a", 20, 5);
  ASSERT_EQ(tasks.size(), 20U);
  std::set<std::string> distinct;
  for (const auto& t : tasks) {
    distinct.insert(t.clip_id);
    EXPECT_EQ(t.verdict, Verdict::pending);
  }
  EXPECT_EQ(distinct.size(), 20U);
  EXPECT_EQ(tasks.front().task_id, "a/0");
  EXPECT_EQ(sample_for_review(big, "a", 20, 5), tasks);
  EXPECT_NE(sample_for_review(big, "a", 20, 6), tasks);
  EXPECT_EQ(sample_for_review(class_clips("b", 7), "b", 20, 5).size(), 7U);
  EXPECT_THROW(sample_for_review(big, "zzz", 20, 5), InvalidArgument);
}

TEST(Review, RetentionBoundary) {
  std::vector<ReviewTask> tasks;
  for (int i = 0; i < 20; ++i) tasks.push_back(decided("half", i, i < 10));
  for (int i = 0; i < 20; ++i) tasks.push_back(decided("under", i, i < 9));
  for (int i = 0; i < 20; ++i) tasks.push_back(decided("all", i, true));
  const auto d = apply_review_retention(tasks, 0.5);
  EXPECT_TRUE(d.at("half").retained);
  EXPECT_DOUBLE_EQ(d.at("half").fraction, 0.5);
  EXPECT_FALSE(d.at("under").retained);
  EXPECT_TRUE(d.at("all").retained);

  std::vector<SoundClass> classes(2);
  classes[0].id = "half";
  classes[1].id = "under";
  apply_retention_to_classes(classes, d);
  EXPECT_NE(classes[0].status, ClassStatus::dropped);
  EXPECT_EQ(classes[1].status, ClassStatus::dropped);

  tasks.back().verdict = Verdict::pending;
  EXPECT_THROW(apply_review_retention(tasks, 0.5), UndecidedTasks);
}

TEST(Review, TasksRoundTrip) {
  testing::TempDir dir;
  auto t = decided("a", 3, true);
  t.reviewer = "r1";
  t.decided_at = 1700000000;
  const std::vector<ReviewTask> tasks = {t, sample_for_review(class_clips("b", 3), "b", 1, 0)[0]};
  save_review_tasks(dir / "t.jsonl", tasks);
  EXPECT_EQ(load_review_tasks(dir / "t.jsonl"), tasks);
}

// K classes, each with `videos` videos of two clips. Audio features sit near
// far-apart class means; the first `noisy` videos of every class carry the
// next class's features instead.
struct Planted {
  std::vector<ClipRecord> clips;
  FeatureMap audio;
  FeatureMap visual;
  std::set<std::string> mislabeled;
};

Planted planted(std::size_t classes, std::size_t videos, std::size_t noisy, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.3);
  Planted p;
  const std::size_t dim = classes + 4;
  for (std::size_t k = 0; k < classes; ++k) {
    const auto cls = "k" + std::to_string(k);
    for (std::size_t v = 0; v < videos; ++v) {
      const auto video = cls + "v" + std::to_string(v);
      const std::size_t truth = v < noisy ? (k + 1) % classes : k;
      for (double start : {0.0, 20.0}) {
        auto c = clip(video, cls, start);
        std::vector<double> a(dim), w(dim);
        for (std::size_t d = 0; d < dim; ++d) {
          a[d] = (d == truth ? 8.0 : 0.0) + n(rng);
          w[d] = n(rng);
        }
        double norm = 0;
        for (double x : w) norm += x * x;
        for (auto& x : w) x /= std::sqrt(norm);
        p.audio[c.clip_id] = a;
        p.visual[c.clip_id] = w;
        if (truth != k) p.mislabeled.insert(c.clip_id);
        p.clips.push_back(c);
      }
    }
  }
  return p;
}

TEST(Ensemble, SeparableCorpusKeepsExactlyCorrectLabels) {
  const auto p = planted(5, 12, 2, 1);
  const SoftmaxTrainer trainer(fast_config());
  const auto top1 = two_split_ensemble_filter(p.clips, p.audio, trainer, 3, 1);
  for (const auto& c : top1.easy) EXPECT_FALSE(p.mislabeled.contains(c.clip_id)) << c.clip_id;
  for (const auto& c : top1.rejected) EXPECT_TRUE(p.mislabeled.contains(c.clip_id)) << c.clip_id;
  EXPECT_EQ(top1.rejected.size(), p.mislabeled.size());

  const auto top3 = two_split_ensemble_filter(p.clips, p.audio, trainer, 3, 3);
  for (const auto& c : top3.rejected) EXPECT_TRUE(p.mislabeled.contains(c.clip_id));
  for (const auto& c : top3.easy) EXPECT_TRUE(c.provenance.has(Provenance::ensemble_easy));
  EXPECT_GE(top3.easy.size(), top1.easy.size());
}

TEST(Ensemble, MeanScoresAndTopThree) {
  const auto p = planted(4, 8, 1, 2);
  const auto r = two_split_ensemble_filter(p.clips, p.audio, SoftmaxTrainer(fast_config()), 1);
  ASSERT_EQ(r.predictions.size(), p.clips.size());
  for (const auto& e : r.predictions) {
    ASSERT_EQ(e.fold_scores.size(), 2U);
    for (std::size_t j = 0; j < e.mean_scores.size(); ++j) {
      EXPECT_DOUBLE_EQ(e.mean_scores[j], (e.fold_scores[0][j] + e.fold_scores[1][j]) / 2.0);
    }
    EXPECT_EQ(e.top3, top_k(e.mean_scores, r.class_ids, 3));
  }
}

TEST(Ensemble, FoldHygieneOnRandomCorpora) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = planted(3, 5 + seed % 4, 1, seed);
    const auto r = two_split_ensemble_filter(p.clips, p.audio, SoftmaxTrainer(fast_config()), seed);
    std::map<std::string, std::string> video_of;
    for (const auto& c : p.clips) video_of[c.clip_id] = c.video_id;
    std::map<std::string, int> times_scored;
    for (const auto& f : r.folds) {
      std::set<std::string> train_videos;
      for (const auto& id : f.train_ids) train_videos.insert(video_of.at(id));
      for (const auto& id : f.scored_ids) {
        EXPECT_FALSE(f.train_ids.contains(id));
        EXPECT_FALSE(train_videos.contains(video_of.at(id)));
        ++times_scored[id];
      }
    }
    for (const auto& c : p.clips) EXPECT_EQ(times_scored[c.clip_id], 2) << c.clip_id;
    const std::vector<std::span<const ClipRecord>> parts = {r.easy, r.rejected};
    EXPECT_TRUE(is_partition(p.clips, parts));
  }
}

TEST(Ensemble, TinyClassAndMissingFeatureRejected) {
  auto p = planted(3, 6, 0, 4);
  p.clips.push_back(clip("lonely", "solo", 0.0));
  p.audio["lonely:0"] = std::vector<double>(7, 0.0);
  p.audio.erase(p.clips.front().clip_id);
  const auto r = two_split_ensemble_filter(p.clips, p.audio, SoftmaxTrainer(fast_config()), 1);
  const auto rejected = ids_of(r.rejected);
  EXPECT_TRUE(rejected.contains("lonely:0"));
  EXPECT_TRUE(rejected.contains(p.clips.front().clip_id));
  EXPECT_GE(r.warnings.size(), 2U);
}

TEST(Mining, SelfSimilarMinedOrthogonalNot) {
  const std::vector<ClipRecord> easy = {clip("e1", "a", 0)};
  const std::vector<ClipRecord> rejected = {clip("same", "a", 0), clip("orth", "a", 0),
                                            clip("other", "b", 0), clip("nofeat", "a", 0)};
  const FeatureMap vis = {{"e1:0", unit(3, 0)}, {"same:0", unit(3, 0)}, {"orth:0", unit(3, 1)},
                          {"other:0", unit(3, 0)}};
  const auto r = mine_hard_positives(easy, rejected, vis, {0.7, 5});
  ASSERT_EQ(r.hard.size(), 1U);
  EXPECT_EQ(r.hard[0].clip_id, "same:0");
  EXPECT_TRUE(r.hard[0].provenance.has(Provenance::mined_hard));
  EXPECT_EQ(r.rejected.size(), 3U);
  EXPECT_DOUBLE_EQ(r.best_similarity.at("same:0"), 1.0);
  EXPECT_DOUBLE_EQ(r.best_similarity.at("orth:0"), 0.0);
  EXPECT_FALSE(r.warnings.empty());

  const auto all = mine_hard_positives(easy, rejected, vis, {0.0, 5});
  EXPECT_EQ(ids_of(all.hard), (std::set<std::string>{"same:0", "orth:0"}));
}

TEST(Mining, MonotoneInTau) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ClipRecord> easy, rejected;
    FeatureMap vis;
    for (int i = 0; i < 40; ++i) {
      auto c = clip("v" + std::to_string(i), i % 2 ? "a" : "b", 0);
      std::vector<double> f(4);
      for (auto& x : f) x = n(rng);
      vis[c.clip_id] = f;
      (i < 15 ? easy : rejected).push_back(c);
    }
    std::size_t previous = SIZE_MAX;
    for (double tau : {-0.5, 0.0, 0.3, 0.6, 0.9, 1.0}) {
      const auto r = mine_hard_positives(easy, rejected, vis, {tau, 3});
      EXPECT_LE(r.hard.size(), previous);
      previous = r.hard.size();
    }
  }
}

TEST(Cosine, ZeroVectorIsZero) {
  EXPECT_DOUBLE_EQ(cosine_similarity(std::vector<double>{0, 0}, std::vector<double>{1, 0}), 0.0);
  EXPECT_NEAR(cosine_similarity(std::vector<double>{1, 1}, std::vector<double>{2, 2}), 1.0, 1e-15);
}

// Class "a" has two clusters. Only the first is present in the training pool
// unless the mined clips from the second join it.
struct TwoCluster {
  std::vector<ClipRecord> base;
  std::vector<ClipRecord> mined;
  std::vector<ClipRecord> rejected;
  FeatureMap audio;
};

TwoCluster two_cluster() {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 0.2);
  TwoCluster t;
  auto add = [&](std::vector<ClipRecord>& into, const std::string& cls, const std::string& video,
                 std::size_t axis) {
    auto c = clip(video, cls, 0.0);
    std::vector<double> f(6);
    for (std::size_t d = 0; d < 6; ++d) f[d] = (d == axis ? 6.0 : 0.0) + n(rng);
    t.audio[c.clip_id] = f;
    into.push_back(c);
  };
  for (int i = 0; i < 6; ++i) add(t.base, "a", "a1_" + std::to_string(i), 0);
  for (int i = 0; i < 6; ++i) add(t.mined, "a", "a2m_" + std::to_string(i), 5);
  for (int i = 0; i < 6; ++i) add(t.rejected, "a", "a2r_" + std::to_string(i), 5);
  for (const char* cls : {"b", "c", "d", "e"}) {
    const std::size_t axis = static_cast<std::size_t>(cls[0] - 'a');
    for (int i = 0; i < 12; ++i) add(t.base, cls, std::string(cls) + std::to_string(i), axis);
  }
  return t;
}

TEST(Retrieval, MinedClusterEnablesRecovery) {
  const auto t = two_cluster();
  const SoftmaxTrainer trainer(fast_config());
  auto with = t.base;
  with.insert(with.end(), t.mined.begin(), t.mined.end());
  const auto r = final_retrieval(with, t.rejected, t.audio, trainer, 2, 1);
  EXPECT_EQ(r.recovered.size(), t.rejected.size());
  for (const auto& c : r.recovered) EXPECT_TRUE(c.provenance.has(Provenance::final_retrieved));
  for (const auto& id : r.fold.scored_ids) EXPECT_FALSE(r.fold.train_ids.contains(id));

  const auto without = final_retrieval(t.base, t.rejected, t.audio, trainer, 2, 1);
  EXPECT_LT(without.recovered.size(), r.recovered.size());

  const auto empty = final_retrieval(with, {}, t.audio, trainer, 2, 1);
  EXPECT_TRUE(empty.recovered.empty());
  EXPECT_TRUE(empty.rejected.empty());
}

TEST(Dedup, IdenticalOrthogonalAndChain) {
  const std::vector<ClipRecord> pair = {clip("y", "a", 0), clip("x", "a", 0)};
  const FeatureMap same = {{"x:0", unit(2, 0)}, {"y:0", unit(2, 0)}};
  std::vector<ClipRecord> removed;
  const auto kept = deduplicate(pair, same, 0.99, &removed);
  ASSERT_EQ(kept.size(), 1U);
  EXPECT_EQ(kept[0].clip_id, "x:0");
  ASSERT_EQ(removed.size(), 1U);
  EXPECT_EQ(removed[0].clip_id, "y:0");

  const std::vector<ClipRecord> three = {clip("p", "a", 0), clip("q", "a", 0), clip("r", "a", 0)};
  const FeatureMap orth = {{"p:0", unit(3, 0)}, {"q:0", unit(3, 1)}, {"r:0", unit(3, 2)}};
  EXPECT_EQ(deduplicate(three, orth), three);

  // Angles 0, theta, 2 theta: neighbours clear 0.99, the ends do not.
  const double theta = std::acos(0.995);
  const FeatureMap chain = {{"p:0", {1.0, 0.0}},
                            {"q:0", {std::cos(theta), std::sin(theta)}},
                            {"r:0", {std::cos(2 * theta), std::sin(2 * theta)}}};
  ASSERT_LT(cosine_similarity(chain.at("p:0"), chain.at("r:0")), 0.99);
  const auto one = deduplicate(three, chain);
  ASSERT_EQ(one.size(), 1U);
  EXPECT_EQ(one[0].clip_id, "p:0");

  // Same features across classes are not duplicates.
  const std::vector<ClipRecord> cross = {clip("x", "a", 0), clip("y", "b", 0)};
  EXPECT_EQ(deduplicate(cross, same).size(), 2U);
}

TEST(Dedup, IdempotentAndOrderIndependent) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick(0, 5);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<ClipRecord> clips;
    FeatureMap vis;
    for (int i = 0; i < 30; ++i) {
      auto c = clip("v" + std::to_string(i), i % 3 ? "a" : "b", 0);
      vis[c.clip_id] = unit(6, static_cast<std::size_t>(pick(rng)));
      clips.push_back(c);
    }
    const auto once = deduplicate(clips, vis);
    EXPECT_EQ(deduplicate(once, vis), once);
    auto shuffled = clips;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(ids_of(deduplicate(shuffled, vis)), ids_of(once));
  }
}

TEST(Partition, DetectsLossAndOverlap) {
  const auto all = class_clips("a", 4);
  const std::vector<ClipRecord> left(all.begin(), all.begin() + 2);
  const std::vector<ClipRecord> right(all.begin() + 2, all.end());
  const std::vector<ClipRecord> overlap(all.begin() + 1, all.end());
  EXPECT_TRUE(is_partition(all, std::vector<std::span<const ClipRecord>>{left, right}));
  EXPECT_FALSE(is_partition(all, std::vector<std::span<const ClipRecord>>{left, overlap}));
  EXPECT_FALSE(is_partition(all, std::vector<std::span<const ClipRecord>>{left}));
}

double purity(std::span<const ClipRecord> clips, const std::set<std::string>& mislabeled) {
  if (clips.empty()) return 1.0;
  std::size_t good = 0;
  for (const auto& c : clips) good += !mislabeled.contains(c.clip_id);
  return static_cast<double>(good) / static_cast<double>(clips.size());
}

TEST(NoiseFilter, PartitionAndPurityOnPlantedNoise) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto p = planted(5, 10, 3, seed + 100);
    std::vector<SoundClass> classes(5);
    for (std::size_t k = 0; k < 5; ++k) {
      classes[k].id = "k" + std::to_string(k);
      classes[k].display_label = classes[k].id;
      classes[k].status = ClassStatus::audio_verified;
    }
    NoiseFilterConfig cfg;
    cfg.seed = seed;
    cfg.min_clips = 1;
    cfg.min_videos = 1;
    const auto r = run_noise_filter(classes, p.clips, p.audio, p.visual, SoftmaxTrainer(fast_config()), cfg);
    const std::vector<std::span<const ClipRecord>> parts = {r.easy, r.hard, r.recovered, r.rejected};
    EXPECT_TRUE(is_partition(p.clips, parts));
    EXPECT_GE(purity(r.final_clips, p.mislabeled), purity(p.clips, p.mislabeled));
    EXPECT_EQ(r.report.stage, 4);
    for (const auto& c : classes) EXPECT_EQ(c.status, ClassStatus::retained);

    auto again = classes;
    for (auto& c : again) c.status = ClassStatus::audio_verified;
    const auto r2 = run_noise_filter(again, p.clips, p.audio, p.visual, SoftmaxTrainer(fast_config()), cfg);
    EXPECT_EQ(r2.final_clips, r.final_clips);
  }
}

TEST(Seeds, DeriveAndHash) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_EQ(derive_seed(9, 4), derive_seed(9, 4));
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

}  // namespace
}  // namespace curator
