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

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "curator/corpus.hpp"

namespace curator {

enum class VariantKind { base, verb_ing, translation, synonym };

std::string_view to_string(VariantKind kind);
VariantKind parse_variant_kind(std::string_view text);

struct QueryVariant {
  std::string class_id;
  std::string text;
  VariantKind kind = VariantKind::base;
  std::string language = "en";

  friend bool operator==(const QueryVariant&, const QueryVariant&) = default;
};

enum class LexiconKind { translation, synonym };

/// Phrase-to-phrases table used for synonym or translation expansion.
/// Keys are matched case-insensitively.
class Lexicon {
 public:
  Lexicon(LexiconKind kind, std::string language,
          std::map<std::string, std::vector<std::string>> entries);

  /// Reads {"kind": ..., "language": ..., "entries": {source: [targets]}}.
  /// Source keys may also sit next to the header keys at the top level.
  static Lexicon load(const std::filesystem::path& path);

  [[nodiscard]] LexiconKind kind() const noexcept { return kind_; }
  [[nodiscard]] const std::string& language() const noexcept { return language_; }
  [[nodiscard]] const std::vector<std::string>* lookup(std::string_view phrase) const;

 private:
  LexiconKind kind_;
  std::string language_;
  std::map<std::string, std::vector<std::string>> entries_;  // lowercase keys
};

/// Base verbs that may open a "<verb> <object>" label, with their -ing forms.
class VerbTable {
 public:
  /// The shipped table of common sound-producing verbs.
  static const VerbTable& builtin();

  /// One verb per line; an optional second column overrides the -ing form.
  /// Blank lines and '#' comments are skipped.
  static VerbTable load(const std::filesystem::path& path);

  explicit VerbTable(std::map<std::string, std::string> forms);

  [[nodiscard]] std::optional<std::string> ing_form(std::string_view verb) const;
  [[nodiscard]] std::size_t size() const noexcept { return forms_.size(); }

 private:
  std::map<std::string, std::string> forms_;
};

/// Regular -ing inflection: "ie" -> "ying", silent-e drop, and final consonant
/// doubling for short consonant-vowel-consonant stems.
std::string inflect_ing(std::string_view verb);

/// All search-query variants for one class: the base label, the "verb-ing
/// object" rewrite when the label opens with a known verb, then one variant
/// per lexicon target matching the base or verb-ing text. Deduplicated
/// case-insensitively, ordered base, verb_ing, synonyms, translations.
std::vector<QueryVariant> expand_queries(const SoundClass& cls, std::span<const Lexicon> lexicons,
                                         const VerbTable& verbs = VerbTable::builtin());

/// Writes variants as JSON lines after per-class case-insensitive dedup;
/// returns the number written.
std::size_t emit_query_manifest(std::span<const QueryVariant> variants,
                                const std::filesystem::path& path);

std::vector<QueryVariant> load_query_manifest(const std::filesystem::path& path);

/// ASCII lowercase; other bytes pass through.
std::string to_lower(std::string_view text);

}  // namespace curator
