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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "curator/corpus.hpp"
#include "curator/matrix.hpp"

namespace curator {

/// No token of a label is in the embedding vocabulary. The class can only be
/// matched through a keyword override.
class AllTokensOutOfVocabulary : public CuratorError {
 public:
  explicit AllTokensOutOfVocabulary(const std::string& label)
      : CuratorError("no token of '" + label + "' is in the embedding vocabulary") {}
};

/// Token embeddings of a fixed dimension, immutable after construction.
class EmbeddingTable {
 public:
  static constexpr std::size_t kDefaultDimension = 512;

  explicit EmbeddingTable(std::size_t dimension = kDefaultDimension);

  /// Text format: a "COUNT DIM" header, then "token v1 ... vD" per line.
  static EmbeddingTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// Adds or replaces a token. Rejects wrong lengths and non-finite values.
  void add(std::string token, std::vector<double> vector);

  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] std::size_t size() const noexcept { return vectors_.size(); }
  [[nodiscard]] const std::vector<double>* find(std::string_view token) const;

 private:
  std::size_t dimension_;
  std::map<std::string, std::vector<double>, std::less<>> vectors_;
};

/// Unit-norm phrase vector: lowercase whitespace tokens, mean of the
/// in-vocabulary token vectors, L2-normalized. Unknown tokens are skipped.
std::vector<double> embed_label(std::string_view label, const EmbeddingTable& table);

/// Cosine similarities between sound labels (rows) and visual labels (columns).
struct AffinityMatrix {
  std::vector<std::string> sound_labels;
  std::vector<std::string> visual_labels;
  Matrix values;

  [[nodiscard]] std::size_t row_of(std::string_view sound_label) const;
};

/// S * O^T for row-normalized S and O, so every entry is a cosine similarity.
/// Entries are clamped to [-1, 1] against rounding.
Matrix affinity_matrix(const Matrix& sound_vecs, const Matrix& visual_vecs);

/// Embeds both label lists and builds the labelled affinity matrix. Sound
/// labels that cannot be embedded get an all-zero row and are reported in
/// `unembeddable`.
AffinityMatrix build_affinity(std::span<const std::string> sound_labels,
                              std::span<const std::string> visual_labels,
                              const EmbeddingTable& table,
                              std::vector<std::string>* unembeddable = nullptr);

using KeywordOverrides = std::map<std::string, std::string>;

/// Ordered visual labels for one sound label: the override (if any) first,
/// then descending affinity with lexicographic tie-break, no duplicates.
/// Length is k; k must not exceed the column count.
std::vector<std::string> top_k_signature(const AffinityMatrix& affinity,
                                         std::string_view sound_label, std::size_t k = 20,
                                         const KeywordOverrides& overrides = {});

/// Proposes overrides by whole-word keyword containment: each sound label is
/// paired with the longest visual label appearing inside it.
KeywordOverrides propose_keyword_overrides(std::span<const std::string> sound_labels,
                                           std::span<const std::string> visual_labels);

KeywordOverrides load_overrides(const std::filesystem::path& path);
void save_overrides(const std::filesystem::path& path, const KeywordOverrides& overrides);

/// class_id -> ordered visual labels.
using SignatureMap = std::map<std::string, std::vector<std::string>>;

/// JSON lines {"class_id", "signature": [...]}.
SignatureMap load_signatures(const std::filesystem::path& path);
void save_signatures(const std::filesystem::path& path, const SignatureMap& signatures);

/// One visual label per line.
std::vector<std::string> load_label_list(const std::filesystem::path& path);

struct SignatureMatchResult {
  SignatureMap signatures;
  std::vector<std::string> warnings;
};

/// Signature for every class: embedding affinity plus keyword overrides.
/// Classes that cannot be embedded fall back to the override alone.
SignatureMatchResult match_signatures(std::span<const SoundClass> classes,
                                      std::span<const std::string> visual_labels,
                                      const EmbeddingTable& table,
                                      const KeywordOverrides& overrides, std::size_t k = 20);

}  // namespace curator
