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

#include "curator/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "curator/corpus.hpp"
#include "curator/noise_filter.hpp"

namespace curator {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw InvalidArgument("config line " + std::to_string(line) + ": " + what);
}

// Reads a quoted string starting at s[pos] == '"'; leaves pos after the quote.
std::string parse_quoted(std::string_view s, std::size_t& pos, std::size_t line) {
  std::string out;
  ++pos;
  while (pos < s.size() && s[pos] != '"') {
    char c = s[pos++];
    if (c == '\\') {
      if (pos >= s.size()) fail(line, "dangling escape");
      const char e = s[pos++];
      switch (e) {
        case 'n': c = '\n'; break;
        case 't': c = '\t'; break;
        case '"': c = '"'; break;
        case '\\': c = '\\'; break;
        default: fail(line, std::string("unknown escape \\") + e);
      }
    }
    out.push_back(c);
  }
  if (pos >= s.size()) fail(line, "unterminated string");
  ++pos;
  return out;
}

std::string strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && in_string) {
      ++i;
    } else if (s[i] == '"') {
      in_string = !in_string;
    } else if (s[i] == '#' && !in_string) {
      return std::string(s.substr(0, i));
    }
  }
  return std::string(s);
}

ConfigValue parse_value(const std::string& text, std::size_t line) {
  if (text.empty()) fail(line, "missing value");
  if (text.front() == '"') {
    std::size_t pos = 0;
    auto s = parse_quoted(text, pos, line);
    if (!trim(std::string_view(text).substr(pos)).empty()) fail(line, "text after string");
    return s;
  }
  if (text.front() == '[') {
    std::vector<std::string> items;
    std::size_t pos = 1;
    while (true) {
      while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
      if (pos >= text.size()) fail(line, "unterminated array");
      if (text[pos] == ']') break;
      if (text[pos] != '"') fail(line, "arrays hold strings only");
      items.push_back(parse_quoted(text, pos, line));
      while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
      if (pos < text.size() && text[pos] == ',') ++pos;
    }
    if (pos + 1 != text.size()) fail(line, "text after array");
    return items;
  }
  if (text == "true") return true;
  if (text == "false") return false;

  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (text.find_first_of(".eE") == std::string::npos || text == "inf" || text == "nan") {
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(first, last, i);
    if (ec == std::errc() && p == last) return i;
  }
  double d = 0.0;
  auto [p, ec] = std::from_chars(first, last, d);
  if (ec != std::errc() || p != last) fail(line, "cannot parse value '" + text + "'");
  return d;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, p);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

ConfigTable ConfigTable::parse(std::string_view text) {
  ConfigTable table;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "bad section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (section.empty()) fail(line, "empty section name");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    const auto key = trim(std::string_view(s).substr(0, eq));
    if (key.empty()) fail(line, "empty key");
    const auto full = section.empty() ? key : section + "." + key;
    if (table.values_.contains(full)) fail(line, "duplicate key '" + full + "'");
    table.values_[full] = parse_value(trim(std::string_view(s).substr(eq + 1)), line);
  }
  return table;
}

ConfigTable ConfigTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CuratorError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

std::string ConfigTable::get_string(const std::string& key, std::string fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
  throw InvalidArgument("config key '" + key + "' must be a string");
}

double ConfigTable::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const auto* d = std::get_if<double>(&it->second)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*i);
  throw InvalidArgument("config key '" + key + "' must be a number");
}

std::int64_t ConfigTable::get_int(const std::string& key, std::int64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const auto* i = std::get_if<std::int64_t>(&it->second)) return *i;
  throw InvalidArgument("config key '" + key + "' must be an integer");
}

bool ConfigTable::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (const auto* b = std::get_if<bool>(&it->second)) return *b;
  throw InvalidArgument("config key '" + key + "' must be a boolean");
}

std::vector<std::string> ConfigTable::get_strings(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return {};
  if (const auto* v = std::get_if<std::vector<std::string>>(&it->second)) return *v;
  throw InvalidArgument("config key '" + key + "' must be an array of strings");
}

namespace {

// One row per serialized field: its table key and accessors on PipelineConfig.
struct Field {
  const char* key;
  std::function<void(PipelineConfig&, const ConfigTable&)> read;
  std::function<std::string(const PipelineConfig&)> write;
};

template <typename T>
Field count_field(const char* key, T PipelineConfig::*member) {
  return {key,
          [key, member](PipelineConfig& c, const ConfigTable& t) {
            const auto v = t.get_int(key, static_cast<std::int64_t>(c.*member));
            if (v < 0) throw InvalidArgument(std::string("config key '") + key + "' is negative");
            c.*member = static_cast<T>(v);
          },
          [member](const PipelineConfig& c) { return std::to_string(c.*member); }};
}

Field real_field(const char* key, double PipelineConfig::*member) {
  return {key, [key, member](PipelineConfig& c, const ConfigTable& t) { c.*member = t.get_double(key, c.*member); },
          [member](const PipelineConfig& c) { return format_double(c.*member); }};
}

Field text_field(const char* key, std::string PipelineConfig::*member) {
  return {key, [key, member](PipelineConfig& c, const ConfigTable& t) { c.*member = t.get_string(key, c.*member); },
          [member](const PipelineConfig& c) { return quote(c.*member); }};
}

Field input_field(const char* key, std::string InputPaths::*member) {
  return {key,
          [key, member](PipelineConfig& c, const ConfigTable& t) {
            c.inputs.*member = t.get_string(key, c.inputs.*member);
          },
          [member](const PipelineConfig& c) { return quote(c.inputs.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      count_field("seed", &PipelineConfig::seed),
      text_field("run_dir", &PipelineConfig::run_dir),
      input_field("inputs.classes", &InputPaths::classes),
      input_field("inputs.videos", &InputPaths::videos),
      {"inputs.lexicons",
       [](PipelineConfig& c, const ConfigTable& t) {
         if (t.contains("inputs.lexicons")) c.inputs.lexicons = t.get_strings("inputs.lexicons");
       },
       [](const PipelineConfig& c) {
         std::string s = "[";
         for (std::size_t i = 0; i < c.inputs.lexicons.size(); ++i) {
           if (i > 0) s += ", ";
           s += quote(c.inputs.lexicons[i]);
         }
         return s + "]";
       }},
      input_field("inputs.frame_scores", &InputPaths::frame_scores),
      input_field("inputs.signatures", &InputPaths::signatures),
      input_field("inputs.visual_labels", &InputPaths::visual_labels),
      input_field("inputs.embeddings", &InputPaths::embeddings),
      input_field("inputs.overrides", &InputPaths::overrides),
      input_field("inputs.gate_scores", &InputPaths::gate_scores),
      input_field("inputs.policies", &InputPaths::policies),
      input_field("inputs.audio_features", &InputPaths::audio_features),
      input_field("inputs.visual_features", &InputPaths::visual_features),
      input_field("inputs.review_oracle", &InputPaths::review_oracle),
      input_field("inputs.media_dir", &InputPaths::media_dir),
      real_field("visual.threshold", &PipelineConfig::visual_threshold),
      count_field("visual.frames_per_video", &PipelineConfig::frames_per_video),
      real_field("visual.clip_half_width", &PipelineConfig::clip_half_width),
      count_field("visual.max_clips_per_video", &PipelineConfig::max_clips_per_video),
      count_field("visual.signature_k", &PipelineConfig::signature_k),
      real_field("audio.threshold", &PipelineConfig::audio_threshold),
      text_field("audio.on_missing", &PipelineConfig::on_missing_scores),
      count_field("review.sample", &PipelineConfig::review_sample),
      real_field("review.min_fraction", &PipelineConfig::review_min_fraction),
      count_field("review.lease_seconds", &PipelineConfig::lease_seconds),
      count_field("filter.top_k_keep", &PipelineConfig::top_k_keep),
      real_field("filter.tau", &PipelineConfig::mining_tau),
      count_field("filter.mining_k", &PipelineConfig::mining_k),
      real_field("filter.dedup_threshold", &PipelineConfig::dedup_threshold),
      count_field("corpus.min_videos", &PipelineConfig::min_videos),
      count_field("corpus.min_clips", &PipelineConfig::min_clips),
      count_field("splits.test_per_class", &PipelineConfig::test_per_class),
      count_field("splits.val_per_class", &PipelineConfig::val_per_class),
      real_field("train.learning_rate", &PipelineConfig::learning_rate),
      count_field("train.max_epochs", &PipelineConfig::max_epochs),
      count_field("train.plateau_patience", &PipelineConfig::plateau_patience),
      count_field("train.batch_size", &PipelineConfig::batch_size),
  };
  return all;
}

}  // namespace

void PipelineConfig::validate() const {
  auto unit = [](const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
  };
  auto positive = [](const char* name, std::size_t v) {
    if (v == 0) throw InvalidArgument(std::string(name) + " must be positive");
  };
  unit("visual.threshold", visual_threshold);
  unit("audio.threshold", audio_threshold);
  unit("review.min_fraction", review_min_fraction);
  if (!(dedup_threshold > -1.0 && dedup_threshold <= 1.0)) {
    throw InvalidArgument("filter.dedup_threshold must lie in (-1, 1]");
  }
  if (!(mining_tau >= -1.0 && mining_tau <= 1.0)) throw InvalidArgument("filter.tau must lie in [-1, 1]");
  if (!(clip_half_width > 0.0)) throw InvalidArgument("visual.clip_half_width must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("train.learning_rate must be positive");
  }
  positive("visual.frames_per_video", frames_per_video);
  positive("visual.max_clips_per_video", max_clips_per_video);
  positive("visual.signature_k", signature_k);
  positive("review.sample", review_sample);
  positive("filter.top_k_keep", top_k_keep);
  positive("filter.mining_k", mining_k);
  positive("train.max_epochs", max_epochs);
  positive("train.batch_size", batch_size);
  if (lease_seconds <= 0) throw InvalidArgument("review.lease_seconds must be positive");
  if (on_missing_scores != "drop" && on_missing_scores != "keep") {
    throw InvalidArgument("audio.on_missing must be \"drop\" or \"keep\"");
  }
  if (run_dir.empty()) throw InvalidArgument("run_dir must not be empty");
}

PipelineConfig PipelineConfig::from_table(const ConfigTable& table) {
  std::set<std::string> known;
  PipelineConfig cfg;
  for (const auto& f : fields()) {
    known.insert(f.key);
    f.read(cfg, table);
  }
  for (const auto& [key, value] : table.values()) {
    if (!known.contains(key)) throw InvalidArgument("unknown config key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  auto cfg = from_table(ConfigTable::load(path));
  cfg.base_dir = path.parent_path();
  return cfg;
}

std::string PipelineConfig::to_text() const {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    std::string_view key = f.key;
    const auto dot = key.find('.');
    const std::string sec = dot == std::string_view::npos ? "" : std::string(key.substr(0, dot));
    if (sec != section) {
      out += "\n[" + sec + "]\n";
      section = sec;
    }
    out += std::string(dot == std::string_view::npos ? key : key.substr(dot + 1));
    out += " = " + f.write(*this) + "\n";
  }
  return out;
}

void PipelineConfig::save(const std::filesystem::path& path) const { write_file_atomic(path, to_text()); }

std::string PipelineConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(to_text())));
  return buf;
}

std::filesystem::path PipelineConfig::resolve(const std::string& relative) const {
  if (relative.empty()) return {};
  std::filesystem::path p(relative);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

}  // namespace curator
