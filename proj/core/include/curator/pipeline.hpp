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
#include <set>
#include <span>
#include <string>
#include <vector>

#include "curator/config.hpp"
#include "curator/corpus.hpp"
#include "curator/noise_filter.hpp"

namespace curator {

/// A stage was requested before the stage it reads from completed.
class MissingUpstream : public CuratorError {
 public:
  using CuratorError::CuratorError;
};

/// The run directory belongs to a different configuration.
class ConfigMismatch : public CuratorError {
 public:
  using CuratorError::CuratorError;
};

/// Stage 4 is waiting for review verdicts.
class PendingReview : public CuratorError {
 public:
  PendingReview(std::size_t pending, const std::filesystem::path& tasks)
      : CuratorError(std::to_string(pending) + " review tasks pending in '" + tasks.string() +
                     "'; decide them (curator serve) and rerun stage 4"),
        pending_(pending) {}
  [[nodiscard]] std::size_t pending() const noexcept { return pending_; }

 private:
  std::size_t pending_;
};

struct RunState {
  std::string run_id;
  std::string config_hash;
  std::set<int> completed_stages;
  std::vector<StageReport> stage_reports;  // in stage order

  [[nodiscard]] bool completed(int stage) const { return completed_stages.contains(stage); }

  friend bool operator==(const RunState&, const RunState&) = default;
};

std::string run_state_json(const RunState& state);
RunState load_run_state(const std::filesystem::path& path);
void save_run_state(const std::filesystem::path& path, const RunState& state);

/// File locations inside a run directory.
class RunLayout {
 public:
  explicit RunLayout(std::filesystem::path root) : root_(std::move(root)) {}

  [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }
  [[nodiscard]] std::filesystem::path state() const { return root_ / "state.json"; }
  [[nodiscard]] std::filesystem::path config() const { return root_ / "config.toml"; }
  [[nodiscard]] std::filesystem::path manifests() const { return root_ / "manifests"; }
  [[nodiscard]] std::filesystem::path classes() const { return manifests() / "classes.jsonl"; }
  [[nodiscard]] std::filesystem::path classes(int stage) const;
  [[nodiscard]] std::filesystem::path videos() const { return manifests() / "videos.jsonl"; }
  [[nodiscard]] std::filesystem::path queries() const { return manifests() / "queries.jsonl"; }
  [[nodiscard]] std::filesystem::path signatures() const { return manifests() / "signatures.jsonl"; }
  [[nodiscard]] std::filesystem::path clips(int stage) const;
  [[nodiscard]] std::filesystem::path filter_dir() const { return manifests() / "stage4"; }
  [[nodiscard]] std::filesystem::path dataset() const { return manifests() / "dataset.jsonl"; }
  [[nodiscard]] std::filesystem::path report(int stage) const;
  [[nodiscard]] std::filesystem::path log(int stage) const;
  [[nodiscard]] std::filesystem::path review_tasks() const { return root_ / "review" / "tasks.jsonl"; }

 private:
  std::filesystem::path root_;
};

/// Parses "1-4", "2", "1,3-4" into a stage set; throws InvalidArgument.
std::set<int> parse_stage_list(std::string_view text);

struct PipelineResult {
  RunState state;
  std::vector<int> executed;  // stages that did work on this call
  std::vector<std::string> warnings;
};

/// Runs the requested stages in order under config.run_path(). Completed
/// stages are skipped, so a rerun is a no-op. Each stage reads only the
/// previous stage's manifests and commits its own manifests before the run
/// state records it as complete.
PipelineResult run_pipeline(const PipelineConfig& config, const std::set<int>& stages);

/// Creates the review round for stage 4 from the stage 3 manifests if none
/// exists yet, applying verdicts from inputs.review_oracle when configured.
/// Returns the round.
std::vector<ReviewTask> prepare_review_round(const PipelineConfig& config);

/// Training settings of the stage 4 classifier taken from the config.
TrainConfig train_config(const PipelineConfig& config);

/// Hash over the byte contents of every file below `root`, by relative path.
std::string tree_digest(const std::filesystem::path& root);

}  // namespace curator
