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

#include <httplib.h>

#include <atomic>
#include <json.hpp>
#include <set>
#include <thread>

#include "curator/review_service.hpp"
#include "test_support.hpp"

namespace curator {
namespace {

using json = nlohmann::json;
using testing::TempDir;

std::vector<ReviewTask> round_of(const std::string& cls, int n) {
  std::vector<ReviewTask> out;
  for (int i = 0; i < n; ++i) {
    ReviewTask t;
    t.task_id = cls + "/" + std::to_string(i);
    t.class_id = cls;
    t.clip_id = cls + "v" + std::to_string(i) + ":2500";
    out.push_back(t);
  }
  return out;
}

std::filesystem::path write_round(const TempDir& dir, std::vector<ReviewTask> tasks) {
  const auto path = dir / "tasks.jsonl";
  save_review_tasks(path, tasks);
  return path;
}

TEST(MediaUrl, SecondsFromClipId) {
  EXPECT_EQ(media_url("abc:2500"), "/media/abc.mp4#t=2.5,12.5");
  EXPECT_EQ(media_url("a:b:0"), "/media/a:b.mp4#t=0,10");
}

TEST(Store, LeasesDistinctTasksUntilExpiry) {
  TempDir dir;
  ReviewStore store(write_round(dir, round_of("a", 3)), 0.5, 60);
  const auto t1 = store.lease_next(1000);
  const auto t2 = store.lease_next(1000);
  const auto t3 = store.lease_next(1000);
  ASSERT_TRUE(t1 && t2 && t3);
  EXPECT_EQ((std::set<std::string>{t1->task_id, t2->task_id, t3->task_id}).size(), 3U);
  EXPECT_FALSE(store.lease_next(1001).has_value());
  const auto again = store.lease_next(1061);
  ASSERT_TRUE(again.has_value());
  EXPECT_EQ(again->task_id, t1->task_id);
}

TEST(Store, DecideConflictNotFoundAndPersistence) {
  TempDir dir;
  const auto path = write_round(dir, round_of("a", 2));
  {
    ReviewStore store(path);
    EXPECT_EQ(store.decide("a/0", Verdict::correct, "r", 5), DecideOutcome::ok);
    EXPECT_EQ(store.decide("a/0", Verdict::incorrect, "r", 6), DecideOutcome::conflict);
    EXPECT_EQ(store.decide("zz/0", Verdict::correct, "r", 6), DecideOutcome::not_found);
    EXPECT_EQ(store.pending(), 1U);
  }
  ReviewStore reopened(path);
  const auto tasks = reopened.tasks();
  EXPECT_EQ(tasks[0].verdict, Verdict::correct);
  EXPECT_EQ(tasks[0].reviewer, "r");
  EXPECT_EQ(tasks[0].decided_at, 5);
  EXPECT_EQ(reopened.pending(), 1U);
  const auto next = reopened.lease_next(10);
  ASSERT_TRUE(next.has_value());
  EXPECT_EQ(next->task_id, "a/1");
}

TEST(Store, StatsMatchRetentionRule) {
  TempDir dir;
  auto tasks = round_of("half", 20);
  auto under = round_of("under", 20);
  tasks.insert(tasks.end(), under.begin(), under.end());
  ReviewStore store(write_round(dir, tasks));
  for (int i = 0; i < 20; ++i) {
    store.decide("half/" + std::to_string(i), i < 10 ? Verdict::correct : Verdict::incorrect, "r", 1);
    if (i < 19) store.decide("under/" + std::to_string(i), i < 9 ? Verdict::correct : Verdict::incorrect, "r", 1);
  }
  EXPECT_EQ(*store.stats("half"), (ReviewStats{20, 20, 10, 0.5, true}));
  EXPECT_FALSE(store.stats("under")->retained.has_value());
  store.decide("under/19", Verdict::incorrect, "r", 1);
  EXPECT_EQ(store.stats("under")->retained, false);
  EXPECT_FALSE(store.stats("nope").has_value());

  const auto direct = apply_review_retention(store.tasks(), 0.5);
  for (const auto& [cls, s] : store.all_stats()) EXPECT_EQ(*s.retained, direct.at(cls).retained);
}

TEST(Store, ConcurrentLeasesNeverShareATask) {
  TempDir dir;
  ReviewStore store(write_round(dir, round_of("a", 200)));
  std::vector<std::vector<std::string>> got(8);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < got.size(); ++t) {
    threads.emplace_back([&, t] {
      while (auto task = store.lease_next(100)) got[t].push_back(task->task_id);
    });
  }
  for (auto& t : threads) t.join();
  std::set<std::string> all;
  std::size_t total = 0;
  for (const auto& g : got) {
    total += g.size();
    all.insert(g.begin(), g.end());
  }
  EXPECT_EQ(total, 200U);
  EXPECT_EQ(all.size(), 200U);
}

class ServiceTest : public ::testing::Test {
 protected:
  void start(std::vector<ReviewTask> tasks) {
    path_ = write_round(dir_, std::move(tasks));
    store_ = std::make_unique<ReviewStore>(path_);
    std::filesystem::create_directories(dir_ / "media");
    testing::write_text(dir_ / "media" / "clipv.mp4", "fake-bytes");
    testing::write_text(dir_ / "state.json", R"({"run_id":"run","completed_stages":[1,2,3]})");
    ServiceOptions opts;
    opts.media_dir = dir_ / "media";
    opts.run_state = dir_ / "state.json";
    opts.clock = [this] { return clock_.load(); };
    service_ = std::make_unique<ReviewService>(*store_, opts);
    port_ = service_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { service_->run(); });
    service_->wait_until_ready();
  }
  void TearDown() override {
    if (service_) service_->stop();
    if (thread_.joinable()) thread_.join();
  }
  httplib::Client client() { return httplib::Client("127.0.0.1", port_); }
  static std::string verdict(const std::string& v) { return json{{"verdict", v}, {"reviewer", "t"}}.dump(); }

  TempDir dir_;
  std::filesystem::path path_;
  std::unique_ptr<ReviewStore> store_;
  std::unique_ptr<ReviewService> service_;
  std::thread thread_;
  std::atomic<std::int64_t> clock_{1000};
  int port_ = 0;
};

TEST_F(ServiceTest, NextDecideAndStats) {
  start(round_of("a", 2));
  auto c = client();
  auto r1 = c.Get("/api/review/next");
  ASSERT_TRUE(r1);
  ASSERT_EQ(r1->status, 200);
  const auto task = json::parse(r1->body);
  EXPECT_EQ(task["class_id"], "a");
  EXPECT_EQ(task["media_url"], media_url(task["clip_id"]));

  auto r2 = c.Get("/api/review/next");
  ASSERT_EQ(r2->status, 200);
  EXPECT_NE(json::parse(r2->body)["task_id"], task["task_id"]);
  EXPECT_EQ(c.Get("/api/review/next")->status, 204);

  const std::string id = task["task_id"];
  const auto encoded = "/api/review/" + httplib::detail::encode_url(id);
  EXPECT_EQ(c.Post(encoded, verdict("correct"), "application/json")->status, 200);
  EXPECT_EQ(c.Post(encoded, verdict("incorrect"), "application/json")->status, 409);
  EXPECT_EQ(c.Post("/api/review/a%2F99", verdict("correct"), "application/json")->status, 404);
  EXPECT_EQ(c.Post("/api/review/a%2F1", "{}", "application/json")->status, 400);
  EXPECT_EQ(c.Post("/api/review/a%2F1", verdict("pending"), "application/json")->status, 400);

  auto stats = json::parse(c.Get("/api/classes/a/review-stats")->body);
  EXPECT_EQ(stats["decided"], 1);
  EXPECT_EQ(stats["correct"], 1);
  EXPECT_TRUE(stats["retained"].is_null());
  EXPECT_EQ(c.Get("/api/classes/zzz/review-stats")->status, 404);

  EXPECT_EQ(c.Post("/api/review/a%2F1", verdict("incorrect"), "application/json")->status, 200);
  stats = json::parse(c.Get("/api/classes/a/review-stats")->body);
  EXPECT_DOUBLE_EQ(stats["fraction"].get<double>(), 0.5);
  EXPECT_EQ(stats["retained"], true);
  const auto classes = json::parse(c.Get("/api/classes")->body);
  ASSERT_EQ(classes.size(), 1U);

  // Persisted across a restart of the store.
  ReviewStore reopened(path_);
  EXPECT_EQ(reopened.pending(), 0U);
  EXPECT_EQ(reopened.tasks()[0].verdict, task["task_id"] == "a/0" ? Verdict::correct : Verdict::incorrect);
}

TEST_F(ServiceTest, LeaseExpiryReturnsTask) {
  start(round_of("a", 1));
  auto c = client();
  ASSERT_EQ(c.Get("/api/review/next")->status, 200);
  EXPECT_EQ(c.Get("/api/review/next")->status, 204);
  clock_ += 601;
  EXPECT_EQ(c.Get("/api/review/next")->status, 200);
}

TEST_F(ServiceTest, ConcurrentClientsGetDistinctTasks) {
  start(round_of("a", 40));
  std::vector<std::set<std::string>> got(4);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < got.size(); ++t) {
    threads.emplace_back([&, t] {
      auto c = client();
      for (int i = 0; i < 10; ++i) {
        auto r = c.Get("/api/review/next");
        if (r && r->status == 200) got[t].insert(json::parse(r->body)["task_id"].get<std::string>());
      }
    });
  }
  for (auto& t : threads) t.join();
  std::set<std::string> all;
  for (const auto& g : got) all.insert(g.begin(), g.end());
  EXPECT_EQ(all.size(), 40U);
}

TEST_F(ServiceTest, RunStateAndMedia) {
  start(round_of("a", 1));
  auto c = client();
  auto state = c.Get("/api/run/state");
  ASSERT_EQ(state->status, 200);
  EXPECT_EQ(json::parse(state->body)["run_id"], "run");
  auto media = c.Get("/media/clipv.mp4");
  ASSERT_EQ(media->status, 200);
  EXPECT_EQ(media->body, "fake-bytes");
}

TEST(Service, BindFailsOnBusyPort) {
  TempDir dir;
  ReviewStore store(write_round(dir, round_of("a", 1)));
  ReviewService first(store, {});
  const int port = first.bind("127.0.0.1", 0);
  ReviewService second(store, {});
  EXPECT_THROW(second.bind("127.0.0.1", port), CuratorError);
  EXPECT_THROW(ReviewService(store, ServiceOptions{dir / "missing", {}, {}, {}}), CuratorError);
}

}  // namespace
}  // namespace curator
