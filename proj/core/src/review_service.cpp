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

#include "curator/review_service.hpp"

#include <chrono>
#include <cstdio>

#include <httplib.h>

#include "json_util.hpp"

namespace curator {

using detail::json;

ReviewStore::ReviewStore(std::filesystem::path tasks_path, double min_fraction,
                         std::int64_t lease_seconds)
    : path_(std::move(tasks_path)), min_fraction_(min_fraction), lease_seconds_(lease_seconds) {
  if (lease_seconds_ <= 0) throw InvalidArgument("lease must be positive");
  tasks_ = load_review_tasks(path_);
}

std::optional<ReviewTask> ReviewStore::lease_next(std::int64_t now) {
  std::lock_guard lock(mutex_);
  for (const auto& t : tasks_) {
    if (t.verdict != Verdict::pending) continue;
    auto it = lease_until_.find(t.task_id);
    if (it != lease_until_.end() && it->second > now) continue;
    lease_until_[t.task_id] = now + lease_seconds_;
    return t;
  }
  return std::nullopt;
}

DecideOutcome ReviewStore::decide(const std::string& task_id, Verdict verdict,
                                  const std::string& reviewer, std::int64_t now) {
  if (verdict == Verdict::pending) throw InvalidArgument("a verdict must be correct or incorrect");
  std::lock_guard lock(mutex_);
  for (auto& t : tasks_) {
    if (t.task_id != task_id) continue;
    if (t.verdict != Verdict::pending) return DecideOutcome::conflict;
    const auto before = t;
    t.verdict = verdict;
    t.reviewer = reviewer;
    t.decided_at = now;
    try {
      save_review_tasks(path_, tasks_);
    } catch (...) {
      t = before;
      throw;
    }
    lease_until_.erase(task_id);
    return DecideOutcome::ok;
  }
  return DecideOutcome::not_found;
}

ReviewStats ReviewStore::stats_locked(const std::string& class_id) const {
  ReviewStats s;
  for (const auto& t : tasks_) {
    if (t.class_id != class_id) continue;
    ++s.total;
    if (t.verdict == Verdict::pending) continue;
    ++s.decided;
    if (t.verdict == Verdict::correct) ++s.correct;
  }
  if (s.decided > 0) s.fraction = static_cast<double>(s.correct) / static_cast<double>(s.decided);
  if (s.total > 0 && s.decided == s.total) {
    // Same rule as apply_review_retention, evaluated on this class alone.
    std::vector<ReviewTask> own;
    for (const auto& t : tasks_) {
      if (t.class_id == class_id) own.push_back(t);
    }
    s.retained = apply_review_retention(own, min_fraction_).at(class_id).retained;
  }
  return s;
}

std::optional<ReviewStats> ReviewStore::stats(const std::string& class_id) const {
  std::lock_guard lock(mutex_);
  auto s = stats_locked(class_id);
  if (s.total == 0) return std::nullopt;
  return s;
}

std::map<std::string, ReviewStats> ReviewStore::all_stats() const {
  std::lock_guard lock(mutex_);
  std::map<std::string, ReviewStats> out;
  for (const auto& t : tasks_) {
    if (!out.contains(t.class_id)) out[t.class_id] = stats_locked(t.class_id);
  }
  return out;
}

std::vector<ReviewTask> ReviewStore::tasks() const {
  std::lock_guard lock(mutex_);
  return tasks_;
}

std::size_t ReviewStore::pending() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& t : tasks_) n += t.verdict == Verdict::pending ? 1 : 0;
  return n;
}

std::string media_url(const std::string& clip_id) {
  const auto colon = clip_id.rfind(':');
  if (colon == std::string::npos) return "/media/" + clip_id;
  const auto video = clip_id.substr(0, colon);
  long long start_ms = 0;
  try {
    start_ms = std::stoll(clip_id.substr(colon + 1));
  } catch (const std::exception&) {
    return "/media/" + video + ".mp4";
  }
  const long long end_ms = start_ms + static_cast<long long>(kClipSeconds * 1000.0);
  auto seconds = [](long long ms) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld.%03lld", ms / 1000, ms % 1000);
    std::string s(buf);
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
  };
  return "/media/" + video + ".mp4#t=" + seconds(start_ms) + "," + seconds(end_ms);
}

namespace {

json stats_json(const std::string& class_id, const ReviewStats& s) {
  return {{"class_id", class_id},
          {"total", s.total},
          {"decided", s.decided},
          {"correct", s.correct},
          {"fraction", s.fraction},
          {"retained", s.retained ? json(*s.retained) : json(nullptr)}};
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

}  // namespace

struct ReviewService::Impl {
  ReviewStore& store;
  ServiceOptions options;
  httplib::Server server;

  Impl(ReviewStore& s, ServiceOptions o) : store(s), options(std::move(o)) {}

  std::int64_t now() const {
    if (options.clock) return options.clock();
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }

  void routes() {
    // The library default sets SO_REUSEPORT, which lets a second server bind
    // a port that is already serving.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });

    server.Get("/api/review/next", [this](const httplib::Request&, httplib::Response& res) {
      auto task = store.lease_next(now());
      if (!task) {
        res.status = 204;
        return;
      }
      send_json(res, 200,
                {{"task_id", task->task_id},
                 {"class_id", task->class_id},
                 {"clip_id", task->clip_id},
                 {"media_url", media_url(task->clip_id)}});
    });

    server.Post(R"(/api/review/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string task_id = req.matches[1];
      Verdict verdict = Verdict::pending;
      std::string reviewer;
      try {
        const auto body = json::parse(req.body);
        verdict = parse_verdict(body.at("verdict").get<std::string>());
        reviewer = body.value("reviewer", std::string());
      } catch (const std::exception&) {
        send_error(res, 400, "body must be {\"verdict\": \"correct\"|\"incorrect\", \"reviewer\": string}");
        return;
      }
      if (verdict == Verdict::pending) {
        send_error(res, 400, "verdict must be correct or incorrect");
        return;
      }
      switch (store.decide(task_id, verdict, reviewer, now())) {
        case DecideOutcome::ok:
          send_json(res, 200, {{"task_id", task_id}, {"verdict", to_string(verdict)}});
          break;
        case DecideOutcome::conflict: send_error(res, 409, "task already decided"); break;
        case DecideOutcome::not_found: send_error(res, 404, "unknown task"); break;
      }
    });

    server.Get("/api/classes", [this](const httplib::Request&, httplib::Response& res) {
      json out = json::array();
      for (const auto& [id, s] : store.all_stats()) out.push_back(stats_json(id, s));
      send_json(res, 200, out);
    });

    server.Get(R"(/api/classes/(.+)/review-stats)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 const std::string class_id = req.matches[1];
                 auto s = store.stats(class_id);
                 if (!s) {
                   send_error(res, 404, "class has no review tasks");
                   return;
                 }
                 send_json(res, 200, stats_json(class_id, *s));
               });

    server.Get("/api/run/state", [this](const httplib::Request&, httplib::Response& res) {
      if (options.run_state.empty() || !std::filesystem::exists(options.run_state)) {
        send_error(res, 404, "no run state");
        return;
      }
      try {
        send_json(res, 200, detail::read_json_file(options.run_state));
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    });

    if (!options.media_dir.empty() &&
        !server.set_mount_point("/media", options.media_dir.string())) {
      throw CuratorError("media directory '" + options.media_dir.string() + "' does not exist");
    }
    if (!options.ui_dir.empty() && !server.set_mount_point("/", options.ui_dir.string())) {
      throw CuratorError("UI directory '" + options.ui_dir.string() + "' does not exist");
    }
  }
};

ReviewService::ReviewService(ReviewStore& store, ServiceOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {
  impl_->routes();
}

ReviewService::~ReviewService() { stop(); }

int ReviewService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw CuratorError("cannot bind " + host + " to a free port");
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw CuratorError("cannot bind " + host + ":" + std::to_string(port) + " (port in use?)");
  }
  return port;
}

void ReviewService::run() { impl_->server.listen_after_bind(); }

void ReviewService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void ReviewService::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace curator
