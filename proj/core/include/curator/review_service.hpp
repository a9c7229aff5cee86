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
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "curator/noise_filter.hpp"

namespace curator {

struct ReviewStats {
  std::size_t total = 0;
  std::size_t decided = 0;
  std::size_t correct = 0;
  double fraction = 0.0;         // correct / decided, 0 before any verdict
  std::optional<bool> retained;  // set once every task of the class is decided

  friend bool operator==(const ReviewStats&, const ReviewStats&) = default;
};

enum class DecideOutcome { ok, conflict, not_found };

/// Thread-safe review round backed by a task manifest. Every verdict is
/// written through to disk before it is acknowledged.
class ReviewStore {
 public:
  ReviewStore(std::filesystem::path tasks_path, double min_fraction = 0.5,
              std::int64_t lease_seconds = 600);

  /// Leases the first pending task not currently leased, until now + lease.
  std::optional<ReviewTask> lease_next(std::int64_t now);
  DecideOutcome decide(const std::string& task_id, Verdict verdict, const std::string& reviewer,
                       std::int64_t now);
  /// Empty when the class has no tasks in this round.
  [[nodiscard]] std::optional<ReviewStats> stats(const std::string& class_id) const;
  [[nodiscard]] std::map<std::string, ReviewStats> all_stats() const;
  [[nodiscard]] std::vector<ReviewTask> tasks() const;
  [[nodiscard]] std::size_t pending() const;

 private:
  [[nodiscard]] ReviewStats stats_locked(const std::string& class_id) const;

  std::filesystem::path path_;
  double min_fraction_;
  std::int64_t lease_seconds_;
  mutable std::mutex mutex_;
  std::vector<ReviewTask> tasks_;
  std::map<std::string, std::int64_t> lease_until_;  // task_id -> expiry
};

/// Playback URL for a clip id "{video_id}:{start_ms}":
/// "/media/{video_id}.mp4#t={start},{end}" in seconds.
std::string media_url(const std::string& clip_id);

struct ServiceOptions {
  std::filesystem::path media_dir;  // mounted at /media when set
  std::filesystem::path ui_dir;     // mounted at / when set
  std::filesystem::path run_state;  // served at /api/run/state
  std::function<std::int64_t()> clock;  // unix seconds; system clock when empty
};

/// HTTP front end over a ReviewStore:
///   GET  /api/review/next
///   POST /api/review/{task_id}
///   GET  /api/classes
///   GET  /api/classes/{class_id}/review-stats
///   GET  /api/run/state
class ReviewService {
 public:
  ReviewService(ReviewStore& store, ServiceOptions options);
  ~ReviewService();
  ReviewService(const ReviewService&) = delete;
  ReviewService& operator=(const ReviewService&) = delete;

  /// Binds to host:port (port 0 picks a free port) and returns the bound
  /// port. Throws CuratorError when the address is unavailable.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void run();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace curator
