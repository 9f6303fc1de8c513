#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "nsplan/embedding.hpp"
#include "nsplan/errors.hpp"
#include "nsplan/translator.hpp"
#include "support.hpp"

using namespace nsplan;
using nsplan::testing::fixture;

TEST(Admissible, ProductThroughTemplates) {
  auto set = build_admissible_set({"Walk", "SwitchOn"}, {"kitchen", "tv"}, {{"SwitchOn", "switch on {object}"}});
  ASSERT_EQ(set.size(), 4u);
  EXPECT_EQ(set.steps()[0].text, "Walk kitchen");
  EXPECT_EQ(set.steps()[2].text, "switch on kitchen");
  EXPECT_EQ(set.steps()[3].structured, (StructuredStep{"SwitchOn", "tv", 1}));
  EXPECT_THROW(build_admissible_set({}, {"tv"}), ContractError);
}

TEST(Admissible, JsonForms) {
  auto shower = AdmissibleSet::load(fixture("take_shower_admissible.json"));
  EXPECT_EQ(shower.size(), 120u);
  EXPECT_TRUE(shower.contains("walk to bathroom"));
  auto tv = AdmissibleSet::load(fixture("watch_tv_admissible.json"));
  EXPECT_EQ(tv.size(), 5u);
  EXPECT_FALSE(tv.steps()[0].structured);

  std::istringstream empty(R"({"steps": []})");
  EXPECT_THROW(AdmissibleSet::parse_json(empty), ConfigError);
  std::istringstream bad(R"({"actions": ["Walk"]})");
  EXPECT_THROW(AdmissibleSet::parse_json(bad), ConfigError);
  std::istringstream dup(R"({"steps": ["a", "a", "", "b"]})");
  EXPECT_EQ(AdmissibleSet::parse_json(dup).size(), 2u);
}

TEST(Translate, MatchesBruteForceScan) {
  HashEmbedding e({64, 3, true});
  std::vector<std::string> vocab{"walk", "to", "kitchen", "grab", "cup", "switch", "on", "tv", "sit", "sofa"};
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  auto phrase = [&] {
    std::string s = vocab[pick(rng)];
    for (int i = 0; i < 2; ++i) s += " " + vocab[pick(rng)];
    return s;
  };
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::string> texts;
    for (int i = 0; i < 15; ++i) texts.push_back(phrase());
    auto set = AdmissibleSet::from_texts(texts);
    auto query = phrase();
    std::string best;
    double best_score = -2;
    for (const auto& s : set.steps()) {
      double c = cosine(e.embed(query), e.embed(s.text));
      if (c > best_score || (c == best_score && s.text < best)) {
        best = s.text;
        best_score = c;
      }
    }
    auto got = translate(query, set, e);
    EXPECT_EQ(got.step.text, best);
    EXPECT_DOUBLE_EQ(got.confidence, best_score);
    set.warm(e);
    EXPECT_TRUE(set.warmed_for(e));
    EXPECT_EQ(translate(query, set, e).step.text, best);
  }
}

TEST(Translate, AdmissibleTextMapsToItself) {
  HashEmbedding e;
  auto set = AdmissibleSet::load(fixture("take_shower_admissible.json"));
  for (const auto& s : set.steps()) {
    auto t = translate(s.text, set, e);
    EXPECT_NEAR(t.confidence, 1.0, 1e-12) << s.text;
  }
}

TEST(Translate, TiesGoToSmallerText) {
  HashEmbedding e({256, 0, false});  // unigrams only: word order is invisible
  auto set = AdmissibleSet::from_texts({"sofa sit on", "sit on sofa"});
  auto t = translate("on sofa sit", set, e);
  EXPECT_EQ(t.step.text, "sit on sofa");
  EXPECT_NEAR(t.confidence, 1.0, 1e-12);
  EXPECT_THROW(translate("x", AdmissibleSet(), e), ContractError);
}

TEST(Translate, TableAliasesReachTheirTargets) {
  auto table = TableEmbedding::load(fixture("take_shower_table.jsonl"));
  auto set = AdmissibleSet::load(fixture("take_shower_admissible.json"));
  EXPECT_EQ(translate("go to the bathroom", set, table).step.text, "walk to bathroom");
  EXPECT_EQ(translate("turn off the water", set, table).step.text, "switch off washing machine");
  EXPECT_NEAR(translate("wash your hair", set, table).confidence, 0.8, 1e-12);
}

TEST(Translate, HashProviderTieOnSharedWords) {
  // "walk to bathroom" and "turn to bathroom" share the same two words with
  // the query, so they tie and the smaller text wins.
  HashEmbedding e;
  auto set = AdmissibleSet::load(fixture("take_shower_admissible.json"));
  auto t = translate("go to the bathroom", set, e);
  EXPECT_EQ(t.step.text, "turn to bathroom");
  EXPECT_DOUBLE_EQ(t.confidence, cosine(e.embed("go to the bathroom"), e.embed("walk to bathroom")));
}

TEST(TranslatePrompt, CollapsesOnlyAdjacentRepeats) {
  auto set = AdmissibleSet::from_texts({"walk to bathroom", "wash body"});
  HashEmbedding e;
  ProceduralPrompt p;
  for (auto line : {"walk to the bathroom", "walk to bathroom now", "wash your body", "walk to bathroom"}) p.add(line);
  auto out = translate_prompt_traced(p, set, e);
  EXPECT_EQ(out.prompt.lines, (std::vector<std::string>{"walk to bathroom", "wash body", "walk to bathroom"}));
  EXPECT_EQ(out.source_index, (std::vector<std::size_t>{0, 2, 3}));
  EXPECT_EQ(out.confidence.size(), 3u);
  EXPECT_EQ(translate_prompt(p, set, e), out.prompt);
  for (const auto& line : out.prompt.lines) EXPECT_TRUE(set.contains(line));
}
