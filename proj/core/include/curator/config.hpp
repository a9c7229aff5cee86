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
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "curator/errors.hpp"

namespace curator {

/// Value of one key in a TOML-style config file.
using ConfigValue = std::variant<bool, std::int64_t, double, std::string, std::vector<std::string>>;

/// Flat "section.key" -> value table parsed from a subset of TOML: [section]
/// headers, key = value pairs, strings, integers, floats, booleans, arrays of
/// strings and '#' comments.
class ConfigTable {
 public:
  static ConfigTable parse(std::string_view text);
  static ConfigTable load(const std::filesystem::path& path);

  [[nodiscard]] bool contains(const std::string& key) const { return values_.contains(key); }
  [[nodiscard]] const std::map<std::string, ConfigValue>& values() const noexcept { return values_; }
  void set(const std::string& key, ConfigValue value) { values_[key] = std::move(value); }

  [[nodiscard]] std::string get_string(const std::string& key, std::string fallback) const;
  [[nodiscard]] double get_double(const std::string& key, double fallback) const;
  [[nodiscard]] std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;
  [[nodiscard]] std::vector<std::string> get_strings(const std::string& key) const;

 private:
  std::map<std::string, ConfigValue> values_;
};

struct InputPaths {
  std::string classes;
  std::string videos;
  std::vector<std::string> lexicons;
  std::string frame_scores;
  std::string signatures;  // precomputed signatures; empty to match from embeddings
  std::string visual_labels;
  std::string embeddings;
  std::string overrides;
  std::string gate_scores;
  std::string policies;
  std::string audio_features;
  std::string visual_features;
  std::string review_oracle;  // optional verdicts applied to a new review round
  std::string media_dir;

  friend bool operator==(const InputPaths&, const InputPaths&) = default;
};

/// Every tunable of a pipeline run. Paths are relative to `base_dir`.
struct PipelineConfig {
  // thresholds
  double visual_threshold = 0.2;
  double audio_threshold = 0.5;
  double review_min_fraction = 0.5;
  double dedup_threshold = 0.99;
  double mining_tau = 0.7;
  // counts
  std::size_t frames_per_video = 10;
  std::size_t max_clips_per_video = 2;
  double clip_half_width = 5.0;
  std::size_t review_sample = 20;
  std::size_t min_videos = 100;
  std::size_t min_clips = 200;
  std::size_t top_k_keep = 3;
  std::size_t signature_k = 20;
  std::size_t mining_k = 5;
  // splits
  std::size_t test_per_class = 50;
  std::size_t val_per_class = 20;
  // classifier
  double learning_rate = 1e-3;
  std::size_t max_epochs = 100;
  std::size_t plateau_patience = 5;
  std::size_t batch_size = 64;
  // misc
  std::string on_missing_scores = "drop";
  std::int64_t lease_seconds = 600;
  std::uint64_t seed = 0;
  std::string run_dir = "run";
  InputPaths inputs;

  std::filesystem::path base_dir;  // not serialized

  /// Throws InvalidArgument naming the first out-of-range field.
  void validate() const;

  static PipelineConfig from_table(const ConfigTable& table);
  static PipelineConfig load(const std::filesystem::path& path);

  /// Canonical text: fixed section and key order, shortest round-trip numbers.
  [[nodiscard]] std::string to_text() const;
  void save(const std::filesystem::path& path) const;

  /// 16 hex digits of FNV-1a over to_text().
  [[nodiscard]] std::string hash() const;

  /// `relative` resolved against base_dir; empty stays empty.
  [[nodiscard]] std::filesystem::path resolve(const std::string& relative) const;
  [[nodiscard]] std::filesystem::path run_path() const { return resolve(run_dir); }

  friend bool operator==(const PipelineConfig& a, const PipelineConfig& b) {
    return a.to_text() == b.to_text();
  }
};

}  // namespace curator
