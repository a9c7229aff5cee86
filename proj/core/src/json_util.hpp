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

// Internal helpers shared by the manifest readers and writers.

#include <filesystem>
#include <fstream>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "curator/corpus.hpp"

namespace curator::detail {

using json = nlohmann::json;

/// Thrown by field accessors; read_jsonl turns it into a ManifestError.
class FieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename T>
T field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw FieldError(std::string("missing field '") + name + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw FieldError(std::string("bad type for field '") + name + "'");
  }
}

template <typename T>
T field_or(const json& j, const char* name, T fallback) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw FieldError(std::string("bad type for field '") + name + "'");
  }
}

/// Calls `on_record(record, line_number)` for each non-blank line.
void read_jsonl(const std::filesystem::path& path,
                const std::function<void(const json&, std::size_t)>& on_record);

/// Serializes one JSON value per line and writes atomically.
void write_jsonl(const std::filesystem::path& path, std::span<const json> records);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& value);

json to_json(const SoundClass& cls);
json to_json(const VideoRecord& video);
json to_json(const ClipRecord& clip);
json to_json(const ScoreRecord& record);
json to_json(const StageReport& report);

SoundClass sound_class_from_json(const json& j);
VideoRecord video_from_json(const json& j);
ClipRecord clip_from_json(const json& j);
ScoreRecord score_from_json(const json& j);
StageReport stage_report_from_json(const json& j);

template <typename T, typename Encode>
void save_records(const std::filesystem::path& path, std::span<const T> records, Encode encode) {
  std::vector<json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(encode(r));
  write_jsonl(path, lines);
}

}  // namespace curator::detail
