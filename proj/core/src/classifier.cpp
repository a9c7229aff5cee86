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

#include "curator/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "json_util.hpp"

namespace curator {

std::vector<double> pooled_features(const dsp::Spectrogram& spectrogram) {
  const auto& v = spectrogram.values;
  const std::size_t bins = v.rows();
  const std::size_t frames = v.cols();
  if (frames == 0) throw InvalidArgument("spectrogram has no frames");
  std::vector<double> out(2 * bins, 0.0);
  for (std::size_t b = 0; b < bins; ++b) {
    const auto row = v.row(b);
    const double mean = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(frames);
    double var = 0.0;
    for (double x : row) var += (x - mean) * (x - mean);
    out[b] = mean;
    out[bins + b] = std::sqrt(var / static_cast<double>(frames));
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) {
    throw InvalidArgument("plateau_factor must be in (0, 1)");
  }
  if (plateau_patience == 0) throw InvalidArgument("plateau_patience must be >= 1");
  if (batch_size == 0) throw InvalidArgument("batch_size must be >= 1");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw InvalidArgument("val_fraction must be in [0, 1)");
  }
}

LinearSoftmaxModel::LinearSoftmaxModel(std::vector<std::string> class_ids, std::size_t feature_dim)
    : class_ids_(std::move(class_ids)),
      weights_(class_ids_.size(), feature_dim, 0.0),
      bias_(class_ids_.size(), 0.0) {}

std::vector<double> LinearSoftmaxModel::logits(std::span<const double> x) const {
  if (x.size() != feature_dim()) {
    throw InvalidArgument("feature dimension " + std::to_string(x.size()) + " does not match model " +
                          std::to_string(feature_dim()));
  }
  std::vector<double> z(num_classes());
  for (std::size_t c = 0; c < z.size(); ++c) z[c] = dot(weights_.row(c), x) + bias_[c];
  return z;
}

std::vector<double> LinearSoftmaxModel::score(const FeatureVector& feature) const {
  return softmax(logits(feature.values));
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double m = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

std::vector<double> predict(const LinearSoftmaxModel& model, const FeatureVector& feature) {
  return model.score(feature);
}

LossGradient cross_entropy_gradient(const LinearSoftmaxModel& model,
                                    std::span<const std::vector<double>> features,
                                    std::span<const std::size_t> labels) {
  if (features.size() != labels.size() || features.empty()) {
    throw InvalidArgument("features and labels must be non-empty and equally long");
  }
  const std::size_t k = model.num_classes();
  const std::size_t d = model.feature_dim();
  LossGradient g{0.0, Matrix(k, d, 0.0), std::vector<double>(k, 0.0)};
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto z = model.logits(features[i]);
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    const double log_norm = m + std::log(sum);
    g.loss += log_norm - z[labels[i]];
    for (std::size_t c = 0; c < k; ++c) {
      const double residual = std::exp(z[c] - log_norm) - (c == labels[i] ? 1.0 : 0.0);
      g.bias_grad[c] += residual;
      auto row = g.weight_grad.row(c);
      for (std::size_t j = 0; j < d; ++j) row[j] += residual * features[i][j];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(features.size());
  g.loss *= inv_n;
  for (double& v : g.weight_grad.data()) v *= inv_n;
  for (double& v : g.bias_grad) v *= inv_n;
  return g;
}

namespace {

double mean_loss(const LinearSoftmaxModel& model, const std::vector<std::vector<double>>& x,
                 const std::vector<std::size_t>& y, std::span<const std::size_t> subset) {
  double total = 0.0;
  for (std::size_t i : subset) {
    const auto z = model.logits(x[i]);
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    total += m + std::log(sum) - z[y[i]];
  }
  return total / static_cast<double>(subset.size());
}

}  // namespace

LinearSoftmaxModel train(std::span<const LabeledExample> examples, const TrainConfig& cfg) {
  cfg.validate();
  if (examples.empty()) throw InvalidArgument("no training examples");

  std::set<std::string> class_set;
  for (const auto& e : examples) class_set.insert(e.class_id);
  if (class_set.size() < 2) throw InvalidArgument("training needs at least two classes");
  std::vector<std::string> class_ids(class_set.begin(), class_set.end());
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < class_ids.size(); ++c) index[class_ids[c]] = c;

  const std::size_t dim = examples.front().feature.values.size();
  std::vector<std::vector<double>> x;
  std::vector<std::size_t> y;
  x.reserve(examples.size());
  y.reserve(examples.size());
  for (const auto& e : examples) {
    if (e.feature.values.size() != dim) throw InvalidArgument("inconsistent feature dimensions");
    for (double v : e.feature.values) {
      if (!std::isfinite(v)) {
        throw InvalidArgument("non-finite feature in clip '" + e.feature.clip_id + "'");
      }
    }
    x.push_back(e.feature.values);
    y.push_back(index.at(e.class_id));
  }

  std::mt19937_64 rng(cfg.seed);
  LinearSoftmaxModel model(class_ids, dim);
  {
    std::normal_distribution<double> init(0.0, cfg.init_scale);
    for (double& w : model.weights().data()) w = init(rng);
  }

  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  auto n_val = static_cast<std::size_t>(std::floor(cfg.val_fraction * static_cast<double>(x.size())));
  n_val = std::min(n_val, x.size() - 1);
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> fit(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  const std::size_t k = model.num_classes();
  Matrix m_w(k, dim, 0.0), v_w(k, dim, 0.0);
  std::vector<double> m_b(k, 0.0), v_b(k, 0.0);
  double lr = cfg.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  std::uint64_t step = 0;

  std::vector<std::vector<double>> batch_x;
  std::vector<std::size_t> batch_y;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(fit.begin(), fit.end(), rng);
    for (std::size_t start = 0; start < fit.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(fit.size(), start + cfg.batch_size);
      batch_x.clear();
      batch_y.clear();
      for (std::size_t i = start; i < stop; ++i) {
        batch_x.push_back(x[fit[i]]);
        batch_y.push_back(y[fit[i]]);
      }
      const auto g = cross_entropy_gradient(model, batch_x, batch_y);
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      auto adam = [&](double& param, double& m, double& v, double grad) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
        param -= lr * (m / c1) / (std::sqrt(v / c2) + cfg.epsilon);
      };
      auto w = model.weights().data();
      auto gw = g.weight_grad.data();
      auto mw = m_w.data();
      auto vw = v_w.data();
      for (std::size_t i = 0; i < w.size(); ++i) adam(w[i], mw[i], vw[i], gw[i]);
      for (std::size_t c = 0; c < k; ++c) adam(model.bias()[c], m_b[c], v_b[c], g.bias_grad[c]);
    }

    EpochLog log;
    log.epoch = epoch;
    log.learning_rate = lr;
    log.train_loss = mean_loss(model, x, y, fit);
    log.val_loss = val.empty() ? log.train_loss : mean_loss(model, x, y, val);
    model.train_log().push_back(log);

    if (log.val_loss < best) {
      best = log.val_loss;
      stale = 0;
    } else if (++stale >= cfg.plateau_patience) {
      lr *= cfg.plateau_factor;
      stale = 0;
      if (lr < cfg.min_learning_rate) break;
    }
  }
  return model;
}

std::vector<std::string> top_k(std::span<const double> scores,
                               std::span<const std::string> class_ids, std::size_t k) {
  if (scores.size() != class_ids.size()) throw InvalidArgument("scores and class ids differ in length");
  if (k == 0 || k > scores.size()) {
    throw InvalidArgument("k = " + std::to_string(k) + " outside 1.." + std::to_string(scores.size()));
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return class_ids[a] < class_ids[b];
                    });
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(class_ids[order[i]]);
  return out;
}

std::vector<std::string> top_k(const std::map<std::string, double>& scores, std::size_t k) {
  std::vector<std::string> ids;
  std::vector<double> values;
  ids.reserve(scores.size());
  values.reserve(scores.size());
  for (const auto& [id, s] : scores) {
    ids.push_back(id);
    values.push_back(s);
  }
  return top_k(values, ids, k);
}

std::unique_ptr<Scorer> SoftmaxTrainer::train(std::span<const LabeledExample> examples,
                                              std::uint64_t seed) const {
  auto cfg = cfg_;
  cfg.seed = seed;
  return std::make_unique<LinearSoftmaxModel>(curator::train(examples, cfg));
}

void LinearSoftmaxModel::save(const std::filesystem::path& path) const {
  detail::json log = detail::json::array();
  for (const auto& e : train_log_) {
    log.push_back({{"epoch", e.epoch},
                   {"train_loss", e.train_loss},
                   {"val_loss", e.val_loss},
                   {"learning_rate", e.learning_rate}});
  }
  const auto w = weights_.data();
  detail::json doc{{"class_ids", class_ids_},
                   {"feature_dim", feature_dim()},
                   {"weights", std::vector<double>(w.begin(), w.end())},
                   {"bias", bias_},
                   {"train_log", log}};
  detail::write_json_file(path, doc);
}

LinearSoftmaxModel LinearSoftmaxModel::load(const std::filesystem::path& path) {
  const auto doc = detail::read_json_file(path);
  try {
    auto ids = detail::field<std::vector<std::string>>(doc, "class_ids");
    const auto dim = detail::field<std::size_t>(doc, "feature_dim");
    const auto w = detail::field<std::vector<double>>(doc, "weights");
    const auto b = detail::field<std::vector<double>>(doc, "bias");
    LinearSoftmaxModel model(std::move(ids), dim);
    if (w.size() != model.num_classes() * dim || b.size() != model.num_classes()) {
      throw CuratorError("model '" + path.string() + "': inconsistent shapes");
    }
    std::copy(w.begin(), w.end(), model.weights().data().begin());
    model.bias() = b;
    for (const auto& e : doc.value("train_log", detail::json::array())) {
      model.train_log().push_back({e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(),
                                   e.at("val_loss").get<double>(),
                                   e.at("learning_rate").get<double>()});
    }
    return model;
  } catch (const detail::FieldError& e) {
    throw CuratorError("model '" + path.string() + "': " + e.what());
  }
}

std::vector<FeatureVector> load_features(const std::filesystem::path& path) {
  std::vector<FeatureVector> out;
  std::unordered_map<std::string, bool> seen;
  std::size_t dim = 0;
  detail::read_jsonl(path, [&](const detail::json& j, std::size_t line) {
    FeatureVector f;
    f.clip_id = detail::field<std::string>(j, "clip_id");
    f.values = detail::field<std::vector<double>>(j, "vector");
    if (f.values.empty()) throw detail::FieldError("empty vector");
    if (out.empty()) dim = f.values.size();
    if (f.values.size() != dim) throw detail::FieldError("vector dimension differs from the first record");
    for (double v : f.values) {
      if (!std::isfinite(v)) throw detail::FieldError("non-finite vector component");
    }
    if (!seen.emplace(f.clip_id, true).second) {
      throw ManifestError(path.string(), line, "duplicate id '" + f.clip_id + "'");
    }
    out.push_back(std::move(f));
  });
  return out;
}

void save_features(const std::filesystem::path& path, std::span<const FeatureVector> features) {
  detail::save_records(path, features, [](const FeatureVector& f) {
    return detail::json{{"clip_id", f.clip_id}, {"vector", f.values}};
  });
}

}  // namespace curator
