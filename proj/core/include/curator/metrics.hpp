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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "curator/errors.hpp"

namespace curator::metrics {

/// Inverse standard normal CDF. Acklam's rational approximation refined by one
/// Halley step against erfc; absolute error far below 1e-9 on (0, 1).
double inverse_normal_cdf(double p);

/// Mean over positive items of precision at their rank. Items are ranked by
/// descending score with ties kept in input order. Needs one positive.
double average_precision(std::span<const double> scores, std::span<const int> labels);

/// Mann-Whitney AUC: fraction of (positive, negative) pairs ordered
/// correctly, ties counting one half. Needs both classes present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// sqrt(2) * inverse_normal_cdf(auc). Returns +/-infinity at 1 and 0.
double d_prime(double auc);

using Predictions = std::map<std::string, std::map<std::string, double>>;  // clip -> class -> score
using Truth = std::map<std::string, std::string>;                           // clip -> class

/// Fraction of clips whose true class is among the k best scores
/// (ties broken by class id).
double top_k_accuracy(const Predictions& predictions, const Truth& truth, std::size_t k);

struct ClassMetrics {
  std::optional<double> ap;   // empty without positives
  std::optional<double> auc;  // empty unless both positives and negatives exist
  std::size_t support = 0;
};

struct EvalReport {
  std::map<std::string, ClassMetrics> per_class;
  std::optional<double> map;
  std::optional<double> auc;
  std::optional<double> d_prime;
  double top1 = 0.0;
  double top5 = 0.0;
  std::size_t num_classes = 0;
  std::size_t num_clips = 0;
};

/// One-vs-rest AP and AUC per class, macro-averaged over classes that define
/// them; d-prime from the macro AUC; top-1 and top-5 over clips (top-5 uses
/// min(5, classes)). The class universe is the union of truth labels and
/// prediction keys; a clip missing a class score counts it as 0.
EvalReport evaluate(const Predictions& predictions, const Truth& truth);

Predictions load_predictions(const std::filesystem::path& path);
/// JSON lines {"clip_id", "class_id"}.
Truth load_truth(const std::filesystem::path& path);
void save_report(const std::filesystem::path& path, const EvalReport& report);

}  // namespace curator::metrics
