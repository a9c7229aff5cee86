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

#include "curator/query_expansion.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json_util.hpp"

namespace curator {

namespace {

constexpr std::array kVariantKindNames{"base", "verb_ing", "translation", "synonym"};

// Keep in sync with data/verbs.txt.
constexpr std::array kBuiltinVerbs{
    "bang",   "beat",   "blow",   "boil",    "bounce",  "bowl",   "brush",  "chop",
    "chew",   "clap",   "close",  "cough",   "crack",   "crunch", "cry",    "cut",
    "dive",   "dribble", "drill", "drive",   "drum",    "eat",    "fire",   "fly",
    "fry",    "hammer", "hit",    "hum",     "kick",    "knock",  "laugh",  "launch",
    "mow",    "open",   "play",   "pluck",   "pour",    "ride",   "ring",   "roll",
    "row",    "sail",   "saw",    "shake",   "shoot",   "shout",  "sing",   "skate",
    "ski",    "slam",   "snore",  "splash",  "strike",  "strum",  "sweep",  "swim",
    "tap",    "toss",   "tune",   "type",    "use",     "vacuum", "wash",   "whistle",
    "wind",   "yell",   "zip",
};

bool is_vowel(char c) noexcept {
  switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u': return true;
    default: return false;
  }
}

std::size_t vowel_groups(std::string_view w) noexcept {
  std::size_t groups = 0;
  bool in_group = false;
  for (char c : w) {
    const bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  return groups;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::string join_words(const std::vector<std::string>& words, std::size_t from) {
  std::string out;
  for (std::size_t i = from; i < words.size(); ++i) {
    if (i > from) out += ' ';
    out += words[i];
  }
  return out;
}

}  // namespace

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(c < 0x80 ? std::tolower(c) : c);
  });
  return out;
}

std::string_view to_string(VariantKind kind) {
  return kVariantKindNames[static_cast<std::size_t>(kind)];
}

VariantKind parse_variant_kind(std::string_view text) {
  for (std::size_t i = 0; i < kVariantKindNames.size(); ++i) {
    if (text == kVariantKindNames[i]) return static_cast<VariantKind>(i);
  }
  throw InvalidArgument("unknown variant kind '" + std::string(text) + "'");
}

// --- Lexicon ---------------------------------------------------------------

Lexicon::Lexicon(LexiconKind kind, std::string language,
                 std::map<std::string, std::vector<std::string>> entries)
    : kind_(kind), language_(std::move(language)) {
  if (kind_ == LexiconKind::translation && (language_.empty() || language_ == "en")) {
    throw InvalidArgument("translation lexicon needs a non-English target language");
  }
  for (auto& [source, targets] : entries) {
    if (source.empty()) throw InvalidArgument("lexicon entry with empty source phrase");
    const auto key = to_lower(source);
    auto& slot = entries_[key];
    for (auto& t : targets) {
      if (t.empty()) throw InvalidArgument("lexicon entry '" + source + "' has an empty target");
      if (kind_ == LexiconKind::synonym && to_lower(t) == key) {
        throw InvalidArgument("synonym entry '" + source + "' maps to itself");
      }
      slot.push_back(std::move(t));
    }
  }
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  const auto doc = detail::read_json_file(path);
  if (!doc.is_object()) throw CuratorError("lexicon '" + path.string() + "' is not a JSON object");
  const auto kind_text = doc.value("kind", std::string("synonym"));
  LexiconKind kind;
  if (kind_text == "synonym") {
    kind = LexiconKind::synonym;
  } else if (kind_text == "translation") {
    kind = LexiconKind::translation;
  } else {
    throw CuratorError("lexicon '" + path.string() + "': unknown kind '" + kind_text + "'");
  }
  const auto language = doc.value("language", std::string(kind == LexiconKind::synonym ? "en" : ""));

  std::map<std::string, std::vector<std::string>> entries;
  const auto& table = doc.contains("entries") ? doc.at("entries") : doc;
  for (const auto& [key, value] : table.items()) {
    if (&table == &doc && (key == "kind" || key == "language")) continue;
    if (!value.is_array()) {
      throw CuratorError("lexicon '" + path.string() + "': entry '" + key + "' is not a list");
    }
    entries[key] = value.get<std::vector<std::string>>();
  }
  try {
    return Lexicon(kind, language, std::move(entries));
  } catch (const InvalidArgument& e) {
    throw CuratorError("lexicon '" + path.string() + "': " + e.what());
  }
}

const std::vector<std::string>* Lexicon::lookup(std::string_view phrase) const {
  auto it = entries_.find(to_lower(phrase));
  return it == entries_.end() ? nullptr : &it->second;
}

// --- VerbTable -------------------------------------------------------------

std::string inflect_ing(std::string_view verb) {
  std::string v = to_lower(verb);
  const auto n = v.size();
  if (n >= 2 && v.ends_with("ie")) return v.substr(0, n - 2) + "ying";
  if (n >= 2 && v.back() == 'e' && !v.ends_with("ee") && !v.ends_with("ye") &&
      !v.ends_with("oe")) {
    return v.substr(0, n - 1) + "ing";
  }
  if (n >= 3 && vowel_groups(v) == 1) {
    const char last = v[n - 1];
    if (!is_vowel(last) && last != 'w' && last != 'x' && last != 'y' && is_vowel(v[n - 2]) &&
        !is_vowel(v[n - 3])) {
      return v + last + "ing";
    }
  }
  return v + "ing";
}

VerbTable::VerbTable(std::map<std::string, std::string> forms) {
  for (auto& [verb, ing] : forms) forms_[to_lower(verb)] = ing.empty() ? inflect_ing(verb) : ing;
}

const VerbTable& VerbTable::builtin() {
  static const VerbTable table = [] {
    std::map<std::string, std::string> forms;
    for (const char* v : kBuiltinVerbs) forms[v] = "";
    forms["open"] = "opening";
    return VerbTable(std::move(forms));
  }();
  return table;
}

VerbTable VerbTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CuratorError("cannot open verb table '" + path.string() + "'");
  std::map<std::string, std::string> forms;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    auto words = split_words(line);
    if (words.empty()) continue;
    forms[words[0]] = words.size() > 1 ? words[1] : "";
  }
  return VerbTable(std::move(forms));
}

std::optional<std::string> VerbTable::ing_form(std::string_view verb) const {
  auto it = forms_.find(to_lower(verb));
  if (it == forms_.end()) return std::nullopt;
  return it->second;
}

// --- expansion -------------------------------------------------------------

std::vector<QueryVariant> expand_queries(const SoundClass& cls, std::span<const Lexicon> lexicons,
                                         const VerbTable& verbs) {
  if (cls.display_label.empty()) throw InvalidArgument("class '" + cls.id + "' has no label");

  std::vector<QueryVariant> out;
  std::unordered_set<std::string> seen;
  auto push = [&](std::string text, VariantKind kind, std::string language) {
    if (seen.insert(to_lower(text)).second) {
      out.push_back(QueryVariant{cls.id, std::move(text), kind, std::move(language)});
    }
  };

  push(cls.display_label, VariantKind::base, "en");

  std::vector<std::string> match_keys{cls.display_label};
  const auto words = split_words(cls.display_label);
  if (words.size() >= 2) {
    if (auto ing = verbs.ing_form(words[0])) {
      std::string text = *ing + " " + join_words(words, 1);
      match_keys.push_back(text);
      push(std::move(text), VariantKind::verb_ing, "en");
    }
  }

  std::vector<std::string> synonyms;
  std::vector<std::pair<std::string, std::string>> translations;  // (text, language)
  for (const auto& lex : lexicons) {
    for (const auto& key : match_keys) {
      const auto* targets = lex.lookup(key);
      if (targets == nullptr) continue;
      for (const auto& t : *targets) {
        if (lex.kind() == LexiconKind::synonym) {
          synonyms.push_back(t);
        } else {
          translations.emplace_back(t, lex.language());
        }
      }
    }
  }
  std::sort(synonyms.begin(), synonyms.end());
  std::sort(translations.begin(), translations.end());
  for (auto& s : synonyms) push(std::move(s), VariantKind::synonym, "en");
  for (auto& [text, lang] : translations) push(std::move(text), VariantKind::translation, lang);
  return out;
}

std::size_t emit_query_manifest(std::span<const QueryVariant> variants,
                                const std::filesystem::path& path) {
  std::vector<detail::json> lines;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& v : variants) {
    if (v.text.empty()) throw InvalidArgument("query variant with empty text");
    if (!seen.insert({v.class_id, to_lower(v.text)}).second) continue;
    lines.push_back(detail::json{{"class_id", v.class_id},
                                 {"text", v.text},
                                 {"kind", to_string(v.kind)},
                                 {"language", v.language}});
  }
  detail::write_jsonl(path, lines);
  return lines.size();
}

std::vector<QueryVariant> load_query_manifest(const std::filesystem::path& path) {
  std::vector<QueryVariant> out;
  detail::read_jsonl(path, [&](const detail::json& j, std::size_t) {
    QueryVariant v;
    v.class_id = detail::field<std::string>(j, "class_id");
    v.text = detail::field<std::string>(j, "text");
    v.kind = parse_variant_kind(detail::field<std::string>(j, "kind"));
    v.language = detail::field_or<std::string>(j, "language", "en");
    if (v.text.empty()) throw detail::FieldError("empty query text");
    if (v.kind == VariantKind::translation && v.language == "en") {
      throw detail::FieldError("translation variant must not be English");
    }
    out.push_back(std::move(v));
  });
  return out;
}

}  // namespace curator
