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
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "curator/corpus.hpp"
#include "curator/dsp.hpp"
#include "curator/matrix.hpp"

namespace curator {

struct FeatureVector {
  std::string clip_id;
  std::vector<double> values;
};

struct LabeledExample {
  FeatureVector feature;
  std::string class_id;
};

/// Per-bin mean over time followed by per-bin population standard deviation.
/// A 257-bin spectrogram gives a 514-d vector.
std::vector<double> pooled_features(const dsp::Spectrogram& spectrogram);

/// Anything that maps a feature vector to one score per class.
class Scorer {
 public:
  virtual ~Scorer() = default;
  /// Scores aligned with class_ids().
  [[nodiscard]] virtual std::vector<double> score(const FeatureVector& feature) const = 0;
  [[nodiscard]] virtual const std::vector<std::string>& class_ids() const = 0;
};

/// Factory for scorers; the seam through which other models plug into the
/// noise filter.
class ClassifierTrainer {
 public:
  virtual ~ClassifierTrainer() = default;
  [[nodiscard]] virtual std::unique_ptr<Scorer> train(std::span<const LabeledExample> examples,
                                                      std::uint64_t seed) const = 0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double learning_rate = 0.0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double plateau_factor = 0.1;
  std::size_t plateau_patience = 5;
  std::size_t max_epochs = 100;
  std::size_t batch_size = 64;
  double val_fraction = 0.1;
  double min_learning_rate = 1e-7;  // training stops once the rate decays below this
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double init_scale = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Linear layer followed by softmax.
class LinearSoftmaxModel final : public Scorer {
 public:
  LinearSoftmaxModel() = default;
  LinearSoftmaxModel(std::vector<std::string> class_ids, std::size_t feature_dim);

  [[nodiscard]] std::vector<double> score(const FeatureVector& feature) const override;
  [[nodiscard]] const std::vector<std::string>& class_ids() const override { return class_ids_; }

  [[nodiscard]] std::vector<double> logits(std::span<const double> x) const;
  [[nodiscard]] std::size_t num_classes() const noexcept { return class_ids_.size(); }
  [[nodiscard]] std::size_t feature_dim() const noexcept { return weights_.cols(); }

  Matrix& weights() noexcept { return weights_; }
  [[nodiscard]] const Matrix& weights() const noexcept { return weights_; }
  std::vector<double>& bias() noexcept { return bias_; }
  [[nodiscard]] const std::vector<double>& bias() const noexcept { return bias_; }

  std::vector<EpochLog>& train_log() noexcept { return train_log_; }
  [[nodiscard]] const std::vector<EpochLog>& train_log() const noexcept { return train_log_; }

  /// JSON {class_ids, feature_dim, weights (row-major), bias, train_log}.
  void save(const std::filesystem::path& path) const;
  static LinearSoftmaxModel load(const std::filesystem::path& path);

 private:
  std::vector<std::string> class_ids_;
  Matrix weights_;  // num_classes x feature_dim
  std::vector<double> bias_;
  std::vector<EpochLog> train_log_;
};

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

/// Softmax scores of `model` for `feature`; throws on dimension mismatch.
std::vector<double> predict(const LinearSoftmaxModel& model, const FeatureVector& feature);

struct LossGradient {
  double loss = 0.0;  // mean cross-entropy
  Matrix weight_grad;
  std::vector<double> bias_grad;
};

/// Mean cross-entropy of `model` over examples given as class indices, and its
/// analytic gradient.
LossGradient cross_entropy_gradient(const LinearSoftmaxModel& model,
                                    std::span<const std::vector<double>> features,
                                    std::span<const std::size_t> labels);

/// Mini-batch Adam on cross-entropy with a reduce-on-plateau schedule driven by
/// a seeded validation split. Requires two or more classes and finite features.
LinearSoftmaxModel train(std::span<const LabeledExample> examples, const TrainConfig& cfg = {});

/// Class ids ordered by descending score, ties by class id, truncated to k.
std::vector<std::string> top_k(std::span<const double> scores,
                               std::span<const std::string> class_ids, std::size_t k);

/// Keyed form of top_k.
std::vector<std::string> top_k(const std::map<std::string, double>& scores, std::size_t k);

/// ClassifierTrainer backed by train() and LinearSoftmaxModel.
class SoftmaxTrainer final : public ClassifierTrainer {
 public:
  explicit SoftmaxTrainer(TrainConfig cfg = {}) : cfg_(cfg) {}
  [[nodiscard]] std::unique_ptr<Scorer> train(std::span<const LabeledExample> examples,
                                              std::uint64_t seed) const override;

 private:
  TrainConfig cfg_;
};

/// JSON lines {"clip_id", "vector": [...]}; all vectors must share a dimension.
std::vector<FeatureVector> load_features(const std::filesystem::path& path);
void save_features(const std::filesystem::path& path, std::span<const FeatureVector> features);

}  // namespace curator
