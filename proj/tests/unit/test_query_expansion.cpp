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

#include <gtest/gtest.h>

#include "curator/query_expansion.hpp"
#include "test_support.hpp"

namespace curator {
namespace {

using testing::TempDir;
using testing::write_text;

SoundClass cls(const std::string& label) {
  SoundClass c;
  c.id = "c";
  c.display_label = label;
  return c;
}

std::vector<std::string> texts(const std::vector<QueryVariant>& v) {
  std::vector<std::string> out;
  for (const auto& q : v) out.push_back(q.text);
  return out;
}

TEST(Inflect, RegularRules) {
  EXPECT_EQ(inflect_ing("ring"), "ringing");
  EXPECT_EQ(inflect_ing("play"), "playing");
  EXPECT_EQ(inflect_ing("drive"), "driving");
  EXPECT_EQ(inflect_ing("row"), "rowing");
  EXPECT_EQ(inflect_ing("chop"), "chopping");
  EXPECT_EQ(inflect_ing("hit"), "hitting");
  EXPECT_EQ(inflect_ing("tie"), "tying");
  EXPECT_EQ(inflect_ing("see"), "seeing");
  EXPECT_EQ(inflect_ing("mix"), "mixing");
  EXPECT_EQ(inflect_ing("knock"), "knocking");
}

TEST(VerbTable, BuiltinCoversCommonVerbs) {
  const auto& t = VerbTable::builtin();
  EXPECT_GE(t.size(), 50U);
  EXPECT_EQ(t.ing_form("open"), "opening");
  EXPECT_EQ(t.ing_form("PLAY"), "playing");
  EXPECT_EQ(t.ing_form("mow"), "mowing");
  EXPECT_FALSE(t.ing_form("ringing").has_value());
}

TEST(Expand, VerbIngRewrite) {
  const auto v = expand_queries(cls("ring church bells"), {});
  ASSERT_EQ(v.size(), 2U);
  EXPECT_EQ(v[0].kind, VariantKind::base);
  EXPECT_EQ(v[0].text, "ring church bells");
  EXPECT_EQ(v[1].kind, VariantKind::verb_ing);
  EXPECT_EQ(v[1].text, "ringing church bells");
  EXPECT_EQ(expand_queries(cls("play electric guitar"), {})[1].text, "playing electric guitar");
}

TEST(Expand, SynonymLexicon) {
  Lexicon syn(LexiconKind::synonym, "en", {{"steam hissing", {"water boiling", "liquid boiling"}}});
  const auto v = expand_queries(cls("steam hissing"), std::vector<Lexicon>{syn});
  EXPECT_EQ(texts(v), (std::vector<std::string>{"steam hissing", "liquid boiling", "water boiling"}));
  EXPECT_EQ(v[1].kind, VariantKind::synonym);
}

TEST(Expand, AlreadyIngGivesBaseOnly) {
  const auto v = expand_queries(cls("ringing church bells"), {});
  ASSERT_EQ(v.size(), 1U);
  EXPECT_EQ(v[0].kind, VariantKind::base);
}

TEST(Expand, OrderAndCaseInsensitiveDedup) {
  Lexicon syn(LexiconKind::synonym, "en", {{"Play Violin", {"violin music", "VIOLIN MUSIC", "fiddling"}}});
  Lexicon es(LexiconKind::translation, "es", {{"playing violin", {"tocando el violin"}}});
  const auto v = expand_queries(cls("play violin"), std::vector<Lexicon>{es, syn});
  EXPECT_EQ(texts(v), (std::vector<std::string>{"play violin", "playing violin", "VIOLIN MUSIC",
                                                "fiddling", "tocando el violin"}));
  EXPECT_EQ(v.back().language, "es");
  EXPECT_EQ(v.back().kind, VariantKind::translation);
}

TEST(Expand, IdempotentOnOwnOutput) {
  Lexicon syn(LexiconKind::synonym, "en", {{"dog barking", {"barking dog"}}});
  const std::vector<Lexicon> lex{syn};
  const auto first = expand_queries(cls("dog barking"), lex);
  for (const auto& q : first) {
    for (const auto& again : expand_queries(cls(q.text), lex)) {
      bool seen = false;
      for (const auto& f : first) seen = seen || to_lower(f.text) == to_lower(again.text);
      EXPECT_TRUE(seen) << again.text;
    }
  }
}

TEST(Lexicon, RejectsSelfSynonymAndEnglishTranslation) {
  EXPECT_THROW(Lexicon(LexiconKind::synonym, "en", {{"a b", {"A B"}}}), InvalidArgument);
  EXPECT_THROW(Lexicon(LexiconKind::translation, "en", {{"a", {"b"}}}), InvalidArgument);
  EXPECT_THROW(Lexicon(LexiconKind::synonym, "en", {{"a", {""}}}), InvalidArgument);
}

TEST(Lexicon, LoadsBothLayouts) {
  TempDir dir;
  write_text(dir / "a.json", R"({"kind": "translation", "language": "zh", "entries": {"Dog Barking": ["狗叫"]}})");
  write_text(dir / "b.json", R"({"kind": "synonym", "language": "en", "dog barking": ["barking dog"]})");
  const auto a = Lexicon::load(dir / "a.json");
  EXPECT_EQ(a.kind(), LexiconKind::translation);
  ASSERT_NE(a.lookup("dog barking"), nullptr);
  EXPECT_EQ(a.lookup("dog barking")->front(), "狗叫");
  const auto b = Lexicon::load(dir / "b.json");
  ASSERT_NE(b.lookup("DOG BARKING"), nullptr);
  EXPECT_EQ(b.lookup("cat"), nullptr);
}

TEST(Manifest, DedupAndCount) {
  TempDir dir;
  std::vector<QueryVariant> v = {{"c", "dog barking", VariantKind::base, "en"},
                                 {"c", "Dog Barking", VariantKind::synonym, "en"},
                                 {"c", "barking dog", VariantKind::synonym, "en"}};
  EXPECT_EQ(emit_query_manifest(v, dir / "q.jsonl"), 2U);
  const auto back = load_query_manifest(dir / "q.jsonl");
  ASSERT_EQ(back.size(), 2U);
  EXPECT_EQ(back[0], v[0]);
  EXPECT_EQ(emit_query_manifest({}, dir / "empty.jsonl"), 0U);
  EXPECT_TRUE(load_query_manifest(dir / "empty.jsonl").empty());
}

TEST(VerbTable, LoadWithOverrides) {
  TempDir dir;
  write_text(dir / "verbs.txt", "# verbs\nplay\n\nswim swimming\nbuzz\n");
  const auto t = VerbTable::load(dir / "verbs.txt");
  EXPECT_EQ(t.size(), 3U);
  EXPECT_EQ(t.ing_form("swim"), "swimming");
  EXPECT_EQ(t.ing_form("buzz"), "buzzing");
}

}  // namespace
}  // namespace curator
