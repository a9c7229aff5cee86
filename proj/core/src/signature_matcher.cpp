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

#include "curator/signature_matcher.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "curator/query_expansion.hpp"
#include "json_util.hpp"

namespace curator {

EmbeddingTable::EmbeddingTable(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw InvalidArgument("embedding dimension must be positive");
}

void EmbeddingTable::add(std::string token, std::vector<double> vector) {
  if (vector.size() != dimension_) {
    throw InvalidArgument("token '" + token + "' has " + std::to_string(vector.size()) +
                          " components, expected " + std::to_string(dimension_));
  }
  for (double v : vector) {
    if (!std::isfinite(v)) throw InvalidArgument("token '" + token + "' has a non-finite component");
  }
  vectors_.insert_or_assign(to_lower(token), std::move(vector));
}

const std::vector<double>* EmbeddingTable::find(std::string_view token) const {
  auto it = vectors_.find(token);
  return it == vectors_.end() ? nullptr : &it->second;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CuratorError("cannot open embeddings '" + path.string() + "'");
  std::string line;
  std::size_t count = 0;
  std::size_t dim = 0;
  if (!std::getline(in, line) || !(std::istringstream(line) >> count >> dim) || dim == 0) {
    throw ManifestError(path.string(), 1, "expected header 'COUNT DIM'");
  }
  EmbeddingTable table(dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream row(line);
    std::string token;
    if (!(row >> token)) continue;
    std::vector<double> v;
    v.reserve(dim);
    double x = 0.0;
    while (row >> x) v.push_back(x);
    if (!row.eof()) throw ManifestError(path.string(), line_no, "unparseable component");
    try {
      table.add(std::move(token), std::move(v));
    } catch (const InvalidArgument& e) {
      throw ManifestError(path.string(), line_no, e.what());
    }
  }
  if (table.size() != count) {
    throw ManifestError(path.string(), line_no,
                        "header announces " + std::to_string(count) + " tokens, found " +
                            std::to_string(table.size()));
  }
  return table;
}

void EmbeddingTable::save(const std::filesystem::path& path) const {
  std::ostringstream out;
  out.precision(17);
  out << vectors_.size() << ' ' << dimension_ << '\n';
  for (const auto& [token, v] : vectors_) {
    out << token;
    for (double x : v) out << ' ' << x;
    out << '\n';
  }
  write_file_atomic(path, out.str());
}

std::vector<double> embed_label(std::string_view label, const EmbeddingTable& table) {
  if (label.empty()) throw InvalidArgument("cannot embed an empty label");
  std::vector<double> sum(table.dimension(), 0.0);
  std::size_t hits = 0;
  std::istringstream in{to_lower(label)};
  std::string token;
  while (in >> token) {
    const auto* v = table.find(token);
    if (v == nullptr) continue;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
    ++hits;
  }
  if (hits == 0) throw AllTokensOutOfVocabulary(std::string(label));
  const double norm = std::sqrt(dot(sum, sum));
  // Tokens that cancel exactly leave no direction.
  if (norm == 0.0) throw AllTokensOutOfVocabulary(std::string(label));
  for (double& x : sum) x /= norm;
  return sum;
}

std::size_t AffinityMatrix::row_of(std::string_view sound_label) const {
  auto it = std::find(sound_labels.begin(), sound_labels.end(), sound_label);
  if (it == sound_labels.end()) {
    throw InvalidArgument("unknown sound label '" + std::string(sound_label) + "'");
  }
  return static_cast<std::size_t>(it - sound_labels.begin());
}

Matrix affinity_matrix(const Matrix& sound_vecs, const Matrix& visual_vecs) {
  if (sound_vecs.cols() != visual_vecs.cols()) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(sound_vecs.cols()) + " vs " +
                          std::to_string(visual_vecs.cols()));
  }
  Matrix out(sound_vecs.rows(), visual_vecs.rows());
  for (std::size_t i = 0; i < sound_vecs.rows(); ++i) {
    const auto s = sound_vecs.row(i);
    for (std::size_t j = 0; j < visual_vecs.rows(); ++j) {
      out(i, j) = std::clamp(dot(s, visual_vecs.row(j)), -1.0, 1.0);
    }
  }
  return out;
}

AffinityMatrix build_affinity(std::span<const std::string> sound_labels,
                              std::span<const std::string> visual_labels,
                              const EmbeddingTable& table, std::vector<std::string>* unembeddable) {
  const auto dim = table.dimension();
  auto embed_rows = [&](std::span<const std::string> labels, std::vector<std::string>* failed) {
    Matrix m(labels.size(), dim);
    for (std::size_t r = 0; r < labels.size(); ++r) {
      try {
        auto v = embed_label(labels[r], table);
        std::copy(v.begin(), v.end(), m.row(r).begin());
      } catch (const AllTokensOutOfVocabulary&) {
        if (failed != nullptr) failed->push_back(labels[r]);
      }
    }
    return m;
  };

  AffinityMatrix a;
  a.sound_labels.assign(sound_labels.begin(), sound_labels.end());
  a.visual_labels.assign(visual_labels.begin(), visual_labels.end());
  const Matrix s = embed_rows(sound_labels, unembeddable);
  const Matrix o = embed_rows(visual_labels, nullptr);
  a.values = affinity_matrix(s, o);
  return a;
}

std::vector<std::string> top_k_signature(const AffinityMatrix& affinity,
                                         std::string_view sound_label, std::size_t k,
                                         const KeywordOverrides& overrides) {
  const auto row = affinity.values.row(affinity.row_of(sound_label));
  const auto n = affinity.visual_labels.size();
  if (k > n) throw InvalidArgument("k exceeds the number of visual labels");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (row[a] != row[b]) return row[a] > row[b];
    return affinity.visual_labels[a] < affinity.visual_labels[b];
  });

  std::vector<std::string> out;
  out.reserve(k);
  std::unordered_set<std::string> used;
  if (auto it = overrides.find(std::string(sound_label)); it != overrides.end() && k > 0) {
    out.push_back(it->second);
    used.insert(it->second);
  }
  for (std::size_t idx : order) {
    if (out.size() >= k) break;
    const auto& label = affinity.visual_labels[idx];
    if (used.insert(label).second) out.push_back(label);
  }
  return out;
}

KeywordOverrides propose_keyword_overrides(std::span<const std::string> sound_labels,
                                           std::span<const std::string> visual_labels) {
  KeywordOverrides out;
  for (const auto& sound : sound_labels) {
    const std::string padded = " " + to_lower(sound) + " ";
    const std::string* best = nullptr;
    for (const auto& visual : visual_labels) {
      if (visual.empty()) continue;
      if (padded.find(" " + to_lower(visual) + " ") == std::string::npos) continue;
      if (best == nullptr || visual.size() > best->size() ||
          (visual.size() == best->size() && visual < *best)) {
        best = &visual;
      }
    }
    if (best != nullptr) out[sound] = *best;
  }
  return out;
}

KeywordOverrides load_overrides(const std::filesystem::path& path) {
  const auto doc = detail::read_json_file(path);
  if (!doc.is_object()) throw CuratorError("override file '" + path.string() + "' must be an object");
  KeywordOverrides out;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_string()) {
      throw CuratorError("override for '" + key + "' must be a string");
    }
    out[key] = value.get<std::string>();
  }
  return out;
}

void save_overrides(const std::filesystem::path& path, const KeywordOverrides& overrides) {
  detail::write_json_file(path, detail::json(overrides));
}

SignatureMap load_signatures(const std::filesystem::path& path) {
  SignatureMap out;
  detail::read_jsonl(path, [&](const detail::json& j, std::size_t line) {
    auto id = detail::field<std::string>(j, "class_id");
    auto sig = detail::field<std::vector<std::string>>(j, "signature");
    if (sig.size() > 20) throw detail::FieldError("signature longer than 20");
    if (!out.emplace(id, std::move(sig)).second) {
      throw ManifestError(path.string(), line, "duplicate id '" + id + "'");
    }
  });
  return out;
}

void save_signatures(const std::filesystem::path& path, const SignatureMap& signatures) {
  std::vector<detail::json> lines;
  for (const auto& [id, sig] : signatures) {
    lines.push_back(detail::json{{"class_id", id}, {"signature", sig}});
  }
  detail::write_jsonl(path, lines);
}

std::vector<std::string> load_label_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CuratorError("cannot open label list '" + path.string() + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

SignatureMatchResult match_signatures(std::span<const SoundClass> classes,
                                      std::span<const std::string> visual_labels,
                                      const EmbeddingTable& table,
                                      const KeywordOverrides& overrides, std::size_t k) {
  std::vector<std::string> labels;
  labels.reserve(classes.size());
  for (const auto& c : classes) labels.push_back(c.display_label);

  std::vector<std::string> failed;
  const auto affinity = build_affinity(labels, visual_labels, table, &failed);
  const std::unordered_set<std::string> unembeddable(failed.begin(), failed.end());
  const auto kk = std::min(k, visual_labels.size());

  SignatureMatchResult result;
  for (const auto& c : classes) {
    if (unembeddable.contains(c.display_label)) {
      auto it = overrides.find(c.display_label);
      if (it == overrides.end()) {
        result.warnings.push_back("class '" + c.id + "' cannot be embedded and has no override");
        result.signatures[c.id] = {};
      } else {
        result.warnings.push_back("class '" + c.id + "' matched by keyword only");
        result.signatures[c.id] = {it->second};
      }
      continue;
    }
    result.signatures[c.id] = top_k_signature(affinity, c.display_label, kk, overrides);
  }
  return result;
}

}  // namespace curator
