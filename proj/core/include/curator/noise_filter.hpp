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
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "curator/classifier.hpp"
#include "curator/corpus.hpp"

namespace curator {

// --- manual review ---------------------------------------------------------

enum class Verdict { pending, correct, incorrect };

std::string_view to_string(Verdict verdict);
Verdict parse_verdict(std::string_view text);

struct ReviewTask {
  std::string task_id;
  std::string class_id;
  std::string clip_id;
  Verdict verdict = Verdict::pending;
  std::string reviewer;
  std::int64_t decided_at = 0;  // unix seconds, 0 while pending

  friend bool operator==(const ReviewTask&, const ReviewTask&) = default;
};

class UndecidedTasks : public CuratorError {
 public:
  using CuratorError::CuratorError;
};

/// Uniform sample without replacement of min(n, class size) clips of one
/// class, reproducible from `seed`. Task ids are "{class_id}/{index}".
std::vector<ReviewTask> sample_for_review(std::span<const ClipRecord> clips,
                                          const std::string& class_id, std::size_t n = 20,
                                          std::uint64_t seed = 0);

struct RetentionDecision {
  std::size_t decided = 0;
  std::size_t correct = 0;
  double fraction = 0.0;
  bool retained = false;
};

/// Per class: retained iff correct / decided >= min_fraction. Throws
/// UndecidedTasks when any task is still pending.
std::map<std::string, RetentionDecision> apply_review_retention(std::span<const ReviewTask> tasks,
                                                                double min_fraction = 0.5);

/// Marks classes whose decision is not retained as dropped.
void apply_retention_to_classes(std::span<SoundClass> classes,
                                const std::map<std::string, RetentionDecision>& decisions);

std::vector<ReviewTask> load_review_tasks(const std::filesystem::path& path);
void save_review_tasks(const std::filesystem::path& path, std::span<const ReviewTask> tasks);

// --- ensemble filtering ----------------------------------------------------

using FeatureMap = std::unordered_map<std::string, std::vector<double>>;

FeatureMap to_feature_map(std::span<const FeatureVector> features);

struct EnsemblePrediction {
  std::string clip_id;
  std::vector<std::vector<double>> fold_scores;  // two held-out score vectors
  std::vector<double> mean_scores;
  std::vector<std::string> top3;
};

/// Training membership of one fold model and the clips it scored.
struct FoldRecord {
  std::set<std::string> train_ids;
  std::vector<std::string> scored_ids;
};

struct EnsembleResult {
  std::vector<ClipRecord> easy;
  std::vector<ClipRecord> rejected;
  std::vector<std::string> class_ids;  // score vector order
  std::vector<EnsemblePrediction> predictions;
  std::vector<FoldRecord> folds;
  std::vector<std::string> warnings;
};

/// Two independent seeded half-splits of each class's videos. In each split a
/// model trained on one half scores the other and vice versa, so every clip
/// gets two held-out score vectors. A clip is an easy positive iff its class
/// is in the top `keep_k` of the mean vector. Classes with fewer than two
/// videos, and clips without features, go straight to rejected.
EnsembleResult two_split_ensemble_filter(std::span<const ClipRecord> clips,
                                         const FeatureMap& features,
                                         const ClassifierTrainer& trainer, std::uint64_t seed,
                                         std::size_t keep_k = 3);

struct MiningConfig {
  double tau = 0.7;
  std::size_t k = 5;
};

struct MiningResult {
  std::vector<ClipRecord> hard;
  std::vector<ClipRecord> rejected;
  std::map<std::string, double> best_similarity;  // per examined rejected clip
  std::vector<std::string> warnings;
};

/// Cosine similarity of a and b; 0 when either is the zero vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// A rejected clip becomes a hard positive when the best of its k nearest
/// same-class easy positives (by cosine similarity of visual features) reaches
/// tau. Clips without a visual feature stay rejected.
MiningResult mine_hard_positives(std::span<const ClipRecord> easy,
                                 std::span<const ClipRecord> rejected,
                                 const FeatureMap& visual_features, const MiningConfig& cfg = {});

struct RetrievalResult {
  std::vector<ClipRecord> recovered;
  std::vector<ClipRecord> rejected;
  FoldRecord fold;
  std::vector<std::string> warnings;
};

/// Trains one model on `kept` and recovers rejected clips whose class is in
/// its top `keep_k`.
RetrievalResult final_retrieval(std::span<const ClipRecord> kept,
                                std::span<const ClipRecord> rejected, const FeatureMap& features,
                                const ClassifierTrainer& trainer, std::uint64_t seed,
                                std::size_t keep_k = 3);

/// Within each class, clips joined by cosine similarity >= threshold form
/// connected components; the lowest clip_id of each survives. Clips without a
/// feature are unique. Output keeps input order; removed clips go to `removed`.
std::vector<ClipRecord> deduplicate(std::span<const ClipRecord> clips,
                                    const FeatureMap& visual_features, double sim_threshold = 0.99,
                                    std::vector<ClipRecord>* removed = nullptr);

/// True when the parts are disjoint and their union is `input` (by clip_id).
bool is_partition(std::span<const ClipRecord> input,
                  std::span<const std::span<const ClipRecord>> parts);

struct NoiseFilterConfig {
  std::size_t keep_k = 3;
  MiningConfig mining;
  double dedup_threshold = 0.99;
  std::size_t min_clips = 200;
  std::size_t min_videos = 100;
  std::uint64_t seed = 0;
};

struct NoiseFilterResult {
  std::vector<ClipRecord> easy;
  std::vector<ClipRecord> hard;
  std::vector<ClipRecord> recovered;
  std::vector<ClipRecord> rejected;
  std::vector<ClipRecord> duplicates;
  std::vector<ClipRecord> final_clips;  // deduplicated easy + hard + recovered of retained classes
  std::vector<FoldRecord> folds;
  StageReport report;
  std::vector<std::string> warnings;
};

/// Ensemble filtering, hard-positive mining, final retrieval and
/// deduplication over clips of classes that passed review, then the stage 4
/// report. Surviving classes become retained.
NoiseFilterResult run_noise_filter(std::span<SoundClass> classes, std::span<const ClipRecord> clips,
                                   const FeatureMap& audio_features,
                                   const FeatureMap& visual_features,
                                   const ClassifierTrainer& trainer, const NoiseFilterConfig& cfg);

/// Independent seed stream derived from a base seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// 64-bit FNV-1a of `text`.
std::uint64_t fnv1a(std::string_view text) noexcept;

}  // namespace curator
