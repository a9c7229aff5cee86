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

#include "curator/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <vector>

#include "curator/classifier.hpp"
#include "json_util.hpp"

namespace curator::metrics {

namespace {

void check_lengths(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
}

}  // namespace

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("inverse_normal_cdf needs p in (0, 1)");

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  // Solve in the lower half and mirror, so the result is exactly antisymmetric.
  const bool upper = p > 0.5;
  const double q_tail = upper ? 1.0 - p : p;

  double x = 0.0;
  if (q_tail < p_low) {
    const double q = std::sqrt(-2.0 * std::log(q_tail));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = q_tail - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }

  // Halley refinement on Phi(x) - q_tail.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - q_tail;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);

  return upper ? -x : x;
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] != 0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  if (hits == 0) throw InvalidArgument("average_precision needs at least one positive");
  return sum / static_cast<double>(hits);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double pairs = 0.0;  // correctly ordered pairs, ties counting 1/2
  std::size_t negatives_below = 0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t pos = 0;
    std::size_t neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] != 0 ? pos : neg) += 1;
      ++j;
    }
    pairs += static_cast<double>(pos * negatives_below) + 0.5 * static_cast<double>(pos * neg);
    negatives_below += neg;
    n_pos += pos;
    n_neg += neg;
    i = j;
  }
  if (n_pos == 0 || n_neg == 0) throw InvalidArgument("roc_auc needs positives and negatives");
  return pairs / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double d_prime(double auc) {
  if (!(auc >= 0.0 && auc <= 1.0)) throw InvalidArgument("AUC must lie in [0, 1]");
  if (auc == 1.0) return std::numeric_limits<double>::infinity();
  if (auc == 0.0) return -std::numeric_limits<double>::infinity();
  return std::numbers::sqrt2 * inverse_normal_cdf(auc);
}

double top_k_accuracy(const Predictions& predictions, const Truth& truth, std::size_t k) {
  if (truth.empty()) throw InvalidArgument("top_k_accuracy needs at least one clip");
  std::size_t hits = 0;
  for (const auto& [clip, cls] : truth) {
    auto it = predictions.find(clip);
    if (it == predictions.end()) throw InvalidArgument("no prediction for clip '" + clip + "'");
    const auto best = top_k(it->second, std::min(k, it->second.size()));
    if (std::find(best.begin(), best.end(), cls) != best.end()) ++hits;
  }
  for (const auto& [clip, scores] : predictions) {
    if (!truth.contains(clip)) throw InvalidArgument("no truth label for clip '" + clip + "'");
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

EvalReport evaluate(const Predictions& predictions, const Truth& truth) {
  std::set<std::string> universe;
  for (const auto& [clip, cls] : truth) universe.insert(cls);
  for (const auto& [clip, scores] : predictions) {
    for (const auto& [cls, s] : scores) universe.insert(cls);
  }

  // Dense clip x class score table in truth order.
  std::vector<std::string> classes(universe.begin(), universe.end());
  Predictions dense;
  for (const auto& [clip, cls] : truth) {
    auto it = predictions.find(clip);
    if (it == predictions.end()) throw InvalidArgument("no prediction for clip '" + clip + "'");
    auto& row = dense[clip];
    for (const auto& c : classes) {
      auto s = it->second.find(c);
      row[c] = s == it->second.end() ? 0.0 : s->second;
    }
  }

  EvalReport report;
  report.num_classes = classes.size();
  report.num_clips = truth.size();
  if (truth.empty()) return report;

  double ap_sum = 0.0, auc_sum = 0.0;
  std::size_t ap_n = 0, auc_n = 0;
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& c : classes) {
    scores.clear();
    labels.clear();
    for (const auto& [clip, cls] : truth) {
      scores.push_back(dense.at(clip).at(c));
      labels.push_back(cls == c ? 1 : 0);
    }
    ClassMetrics m;
    m.support = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    if (m.support > 0) {
      m.ap = average_precision(scores, labels);
      ap_sum += *m.ap;
      ++ap_n;
      if (m.support < labels.size()) {
        m.auc = roc_auc(scores, labels);
        auc_sum += *m.auc;
        ++auc_n;
      }
    }
    report.per_class[c] = m;
  }
  if (ap_n > 0) report.map = ap_sum / static_cast<double>(ap_n);
  if (auc_n > 0) {
    report.auc = auc_sum / static_cast<double>(auc_n);
    report.d_prime = d_prime(*report.auc);
  }
  report.top1 = top_k_accuracy(dense, truth, 1);
  report.top5 = top_k_accuracy(dense, truth, std::min<std::size_t>(5, classes.size()));
  return report;
}

Predictions load_predictions(const std::filesystem::path& path) {
  Predictions out;
  for (auto& r : load_scores(path)) out.emplace(r.clip_id, std::move(r.scores));
  return out;
}

Truth load_truth(const std::filesystem::path& path) {
  Truth out;
  detail::read_jsonl(path, [&](const detail::json& j, std::size_t line) {
    auto clip = detail::field<std::string>(j, "clip_id");
    auto cls = detail::field<std::string>(j, "class_id");
    if (!out.emplace(clip, cls).second) {
      throw ManifestError(path.string(), line, "duplicate id '" + clip + "'");
    }
  });
  return out;
}

void save_report(const std::filesystem::path& path, const EvalReport& report) {
  auto num = [](std::optional<double> v) -> detail::json {
    if (!v) return nullptr;
    if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
    return *v;
  };
  detail::json per_class = detail::json::object();
  for (const auto& [c, m] : report.per_class) {
    per_class[c] = {{"ap", num(m.ap)}, {"auc", num(m.auc)}, {"support", m.support}};
  }
  detail::write_json_file(path, {{"per_class", per_class},
                                 {"map", num(report.map)},
                                 {"auc", num(report.auc)},
                                 {"d_prime", num(report.d_prime)},
                                 {"top1", report.top1},
                                 {"top5", report.top5},
                                 {"num_classes", report.num_classes},
                                 {"num_clips", report.num_clips}});
}

}  // namespace curator::metrics
