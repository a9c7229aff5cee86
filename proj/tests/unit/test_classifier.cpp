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
#include <numeric>
#include <random>

#include "curator/classifier.hpp"
#include "test_support.hpp"

namespace curator {
namespace {

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("c" + std::to_string(i));
  return out;
}

LinearSoftmaxModel random_model(std::mt19937_64& rng, std::size_t classes, std::size_t dim) {
  std::normal_distribution<double> n;
  LinearSoftmaxModel m(ids(classes), dim);
  for (auto& w : m.weights().data()) w = n(rng);
  for (auto& b : m.bias()) b = n(rng);
  return m;
}

double loss_of(const LinearSoftmaxModel& m, const std::vector<std::vector<double>>& x,
               const std::vector<std::size_t>& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total -= std::log(softmax(m.logits(x[i]))[y[i]]);
  return total / static_cast<double>(x.size());
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  const double h = 1e-6;
  for (int instance = 0; instance < 20; ++instance) {
    auto m = random_model(rng, 5, 10);
    std::vector<std::vector<double>> x(8, std::vector<double>(10));
    std::vector<std::size_t> y(8);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (auto& v : x[i]) v = n(rng);
      y[i] = rng() % 5;
    }
    const auto g = cross_entropy_gradient(m, x, y);
    EXPECT_NEAR(g.loss, loss_of(m, x, y), 1e-12);
    for (std::size_t k = 0; k < 5; ++k) {
      for (std::size_t d = 0; d < 10; ++d) {
        const double w = m.weights()(k, d);
        m.weights()(k, d) = w + h;
        const double up = loss_of(m, x, y);
        m.weights()(k, d) = w - h;
        const double down = loss_of(m, x, y);
        m.weights()(k, d) = w;
        EXPECT_LT(rel_err(g.weight_grad(k, d), (up - down) / (2 * h)), 1e-5);
      }
      const double b = m.bias()[k];
      m.bias()[k] = b + h;
      const double up = loss_of(m, x, y);
      m.bias()[k] = b - h;
      const double down = loss_of(m, x, y);
      m.bias()[k] = b;
      EXPECT_LT(rel_err(g.bias_grad[k], (up - down) / (2 * h)), 1e-5);
    }
  }
}

TEST(Softmax, SumsToOneAndTranslationInvariant) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 30.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> z(7);
    for (auto& v : z) v = n(rng);
    const auto p = softmax(z);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
    auto shifted = z;
    const double c = n(rng) * 10.0;
    for (auto& v : shifted) v += c;
    const auto q = softmax(shifted);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-12);
  }
  const auto big = softmax(std::vector<double>{1000.0, 0.0});
  EXPECT_DOUBLE_EQ(big[0], 1.0);
}

TEST(Predict, ZeroWeightsUniform) {
  LinearSoftmaxModel m(ids(4), 3);
  const auto p = predict(m, {"x", {1.0, -2.0, 3.0}});
  for (double v : p) EXPECT_DOUBLE_EQ(v, 0.25);
  EXPECT_THROW(predict(m, {"x", {1.0}}), InvalidArgument);
}

TEST(Predict, SaturatingLogit) {
  LinearSoftmaxModel m(ids(3), 2);
  m.weights()(1, 0) = 10.0;
  // logits (0, 10, 0): p1 = e^10 / (e^10 + 2)
  const double expected = std::exp(10.0) / (std::exp(10.0) + 2.0);
  const auto p = predict(m, {"x", {1.0, 0.0}});
  EXPECT_GT(p[1], 0.99);
  EXPECT_NEAR(p[1], expected, 1e-15);
}

TEST(TopK, OrderTiesAndRange) {
  const auto c = ids(3);
  EXPECT_EQ(top_k(std::vector<double>{0.5, 0.3, 0.2}, c, 2), (std::vector<std::string>{"c0", "c1"}));
  const std::vector<std::string> names = {"d", "b", "a", "c"};
  EXPECT_EQ(top_k(std::vector<double>{0.25, 0.25, 0.25, 0.25}, names, 3),
            (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(top_k(std::vector<double>{0.1, 0.4, 0.2, 0.3}, names, 4),
            (std::vector<std::string>{"b", "c", "a", "d"}));
  EXPECT_THROW(top_k(std::vector<double>{0.5, 0.5, 0.0}, c, 4), InvalidArgument);
  EXPECT_EQ(top_k(std::map<std::string, double>{{"x", 0.1}, {"y", 0.9}}, 1), std::vector<std::string>{"y"});
}

TEST(TopK, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> level(0, 6);
  const auto c = ids(10);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(10);
    for (auto& v : s) v = level(rng) / 6.0;
    auto t = s;
    for (auto& v : t) v = std::exp(3.0 * v) - 7.0;
    for (std::size_t k = 1; k <= 10; ++k) EXPECT_EQ(top_k(s, c, k), top_k(t, c, k));
  }
}

std::vector<LabeledExample> gaussians(std::mt19937_64& rng, std::size_t per_class,
                                      const std::vector<std::vector<double>>& means, double sd) {
  std::normal_distribution<double> n(0.0, sd);
  std::vector<LabeledExample> out;
  for (std::size_t c = 0; c < means.size(); ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      FeatureVector f{"c" + std::to_string(c) + "_" + std::to_string(i), means[c]};
      for (auto& v : f.values) v += n(rng);
      out.push_back({f, "c" + std::to_string(c)});
    }
  }
  return out;
}

double accuracy(const LinearSoftmaxModel& m, const std::vector<LabeledExample>& data) {
  std::size_t hit = 0;
  for (const auto& e : data) hit += top_k(predict(m, e.feature), m.class_ids(), 1)[0] == e.class_id;
  return static_cast<double>(hit) / static_cast<double>(data.size());
}

// Fisher discriminant with pooled covariance, solved in closed form for 2-d.
double lda_accuracy(const std::vector<LabeledExample>& train, const std::vector<LabeledExample>& test) {
  std::array<std::array<double, 2>, 2> mean{};
  std::array<double, 2> count{};
  for (const auto& e : train) {
    const int c = e.class_id == "c1";
    for (int d = 0; d < 2; ++d) mean[c][d] += e.feature.values[d];
    count[c] += 1;
  }
  for (int c = 0; c < 2; ++c) {
    for (int d = 0; d < 2; ++d) mean[c][d] /= count[c];
  }
  double s00 = 0, s01 = 0, s11 = 0;
  for (const auto& e : train) {
    const int c = e.class_id == "c1";
    const double a = e.feature.values[0] - mean[c][0];
    const double b = e.feature.values[1] - mean[c][1];
    s00 += a * a;
    s01 += a * b;
    s11 += b * b;
  }
  const double det = s00 * s11 - s01 * s01;
  const double d0 = mean[1][0] - mean[0][0];
  const double d1 = mean[1][1] - mean[0][1];
  const double w0 = (s11 * d0 - s01 * d1) / det;
  const double w1 = (-s01 * d0 + s00 * d1) / det;
  const double mid = w0 * (mean[0][0] + mean[1][0]) / 2 + w1 * (mean[0][1] + mean[1][1]) / 2;
  std::size_t hit = 0;
  for (const auto& e : test) {
    const bool says_one = w0 * e.feature.values[0] + w1 * e.feature.values[1] > mid;
    hit += says_one == (e.class_id == "c1");
  }
  return static_cast<double>(hit) / static_cast<double>(test.size());
}

TEST(Train, SeparableClassesMatchLdaOracle) {
  std::mt19937_64 rng(4);
  const std::vector<std::vector<double>> means = {{-2.0, 1.0}, {2.0, -1.0}};
  const auto train_set = gaussians(rng, 50, means, 0.5);
  const auto test_set = gaussians(rng, 50, means, 0.5);
  ASSERT_EQ(lda_accuracy(train_set, test_set), 1.0);
  TrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.seed = 9;
  const auto m = train(train_set, cfg);
  EXPECT_EQ(accuracy(m, test_set), 1.0);
}

TEST(Train, ShuffledLabelsAtChance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  std::vector<LabeledExample> data;
  for (int i = 0; i < 3000; ++i) {
    FeatureVector f{"x" + std::to_string(i), std::vector<double>(20)};
    for (auto& v : f.values) v = n(rng);
    data.push_back({f, "c" + std::to_string(rng() % 10)});
  }
  std::vector<LabeledExample> train_set(data.begin(), data.begin() + 2000);
  std::vector<LabeledExample> test_set(data.begin() + 2000, data.end());
  TrainConfig cfg;
  cfg.max_epochs = 20;
  const auto m = train(train_set, cfg);
  EXPECT_NEAR(accuracy(m, test_set), 0.1, 0.05);
}

TEST(Train, DeterministicAndLogsMonotone) {
  std::mt19937_64 rng(6);
  const auto data = gaussians(rng, 60, {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}}, 0.6);
  TrainConfig cfg;
  cfg.seed = 3;
  cfg.max_epochs = 60;
  const auto a = train(data, cfg);
  const auto b = train(data, cfg);
  EXPECT_EQ(a.weights(), b.weights());
  EXPECT_EQ(a.bias(), b.bias());
  const auto& log = a.train_log();
  ASSERT_FALSE(log.empty());
  const std::size_t p = cfg.plateau_patience;
  for (std::size_t i = 0; i + p < log.size(); ++i) {
    bool reduced = false;
    for (std::size_t j = i + 1; j <= i + p; ++j) reduced = reduced || log[j].learning_rate < log[i].learning_rate;
    EXPECT_TRUE(reduced || log[i + p].train_loss <= log[i].train_loss) << "epoch " << i;
  }
}

TEST(Train, RejectsDegenerateInput) {
  std::vector<LabeledExample> one = {{{"a", {1.0}}, "c0"}, {{"b", {2.0}}, "c0"}};
  EXPECT_THROW(train(one), InvalidArgument);
  std::vector<LabeledExample> nan = {{{"a", {NAN}}, "c0"}, {{"b", {2.0}}, "c1"}};
  EXPECT_THROW(train(nan), InvalidArgument);
  TrainConfig bad;
  bad.plateau_factor = 1.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(Model, SaveLoadRoundTrip) {
  testing::TempDir dir;
  std::mt19937_64 rng(7);
  auto m = random_model(rng, 3, 4);
  m.train_log().push_back({1, 0.5, 0.25, 1e-3});
  m.save(dir / "m.json");
  const auto back = LinearSoftmaxModel::load(dir / "m.json");
  EXPECT_EQ(back.class_ids(), m.class_ids());
  EXPECT_EQ(back.weights(), m.weights());
  EXPECT_EQ(back.bias(), m.bias());
  ASSERT_EQ(back.train_log().size(), 1U);
}

TEST(Features, PooledMeanAndStd) {
  dsp::Spectrogram s;
  s.values = Matrix::from_rows({{1.0, 3.0}, {2.0, 2.0}});
  EXPECT_EQ(pooled_features(s), (std::vector<double>{2.0, 2.0, 1.0, 0.0}));
  testing::TempDir dir;
  const std::vector<FeatureVector> f = {{"a", {0.5, 1.0}}, {"b", {-0.25, 3.0}}};
  save_features(dir / "f.jsonl", f);
  const auto back = load_features(dir / "f.jsonl");
  ASSERT_EQ(back.size(), 2U);
  EXPECT_EQ(back[1].values, f[1].values);
}

}  // namespace
}  // namespace curator
