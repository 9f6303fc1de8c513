#include <gtest/gtest.h>

#include <sstream>

#include "nsplan/errors.hpp"
#include "nsplan/knowledge_graph.hpp"
#include "nsplan/task_parser.hpp"

using namespace nsplan;

namespace {

using Chunk = std::pair<std::string, EntityKind>;

std::vector<std::pair<std::string, EntityKind>> parse(std::string_view text, const KnowledgeGraph* g = nullptr) {
  std::vector<std::pair<std::string, EntityKind>> out;
  for (const auto& e : TaskParser().parse_entities(text, g).entities) out.emplace_back(e.key, e.kind);
  return out;
}

}  // namespace

TEST(Parser, TakeShower) {
  auto set = TaskParser().parse_entities("Take shower");
  ASSERT_EQ(set.entities.size(), 2u);
  EXPECT_EQ(set.entities[0], (Entity{"Take shower", "take_shower", EntityKind::kVerbPhrase}));
  EXPECT_EQ(set.entities[1], (Entity{"shower", "shower", EntityKind::kNoun}));
  EXPECT_EQ(set.task_text, "Take shower");
}

TEST(Parser, DeterminerNeverReachesKey) {
  auto got = parse("Take a shower");
  ASSERT_FALSE(got.empty());
  EXPECT_EQ(got[0].first, "take_shower");
  for (const auto& [key, kind] : got) EXPECT_EQ(key.find("a_"), std::string::npos) << key;
}

TEST(Parser, ParticleStaysWithVerb) {
  auto got = parse("Turn off the light");
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0], (Chunk("turn_off_light", EntityKind::kVerbPhrase)));
  EXPECT_EQ(got[1], (Chunk("light", EntityKind::kNoun)));
}

TEST(Parser, NounPhraseAndBareVerb) {
  auto got = parse("Watch TV");
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].first, "watch_tv");
  EXPECT_EQ(got[1].first, "tv");

  auto work = parse("Work");
  ASSERT_EQ(work.size(), 1u);
  EXPECT_EQ(work[0].second, EntityKind::kVerbPhrase);

  auto np = parse("the living room");
  ASSERT_EQ(np.size(), 1u);
  EXPECT_EQ(np[0], (Chunk("living_room", EntityKind::kNounPhrase)));
}

TEST(Parser, KeysAreUniqueInFirstOccurrenceOrder) {
  auto got = parse("Wash dishes and wash dishes");
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].first, "wash_dishes");
  EXPECT_EQ(got[1].first, "dishes");
}

TEST(Parser, EmptyInput) {
  EXPECT_TRUE(parse("").empty());
  EXPECT_TRUE(parse("  ...  ").empty());
}

TEST(NormalizeKey, LowercasesAndJoins) {
  EXPECT_EQ(normalize_key("Take  a Shower!"), "take_a_shower");
  EXPECT_EQ(normalize_key("don't"), "dont");
  EXPECT_EQ(normalize_key("living_room"), "living_room");
}

TEST(NormalizeKey, PluralFallsBackOnlyWhenGraphHasSingular) {
  auto g = KnowledgeGraph::from_triplets({{"book", RelationType(RelationType::Kind::kAtLocation), "shelf", 1.0}});
  EXPECT_EQ(normalize_key("Books", &g), "book");
  EXPECT_EQ(normalize_key("shelfs", &g), "shelf");
  EXPECT_EQ(normalize_key("glasses", &g), "glasses");
  EXPECT_EQ(normalize_key("Books"), "books");
  auto got = parse("Read books", &g);
  EXPECT_EQ(got.back().first, "book");
}

TEST(Lexicon, ParseAndErrors) {
  std::istringstream in("# comment\nfoo\tNOUN\nfoo\tVERB\n\n");
  auto lex = Lexicon::parse(in);
  EXPECT_EQ(lex.tags("foo"), (std::vector<PosTag>{PosTag::kNoun, PosTag::kVerb}));
  EXPECT_TRUE(lex.tags("bar").empty());

  std::istringstream bad("foo NOUN\n");
  EXPECT_THROW(Lexicon::parse(bad), ParseError);
  std::istringstream bad_tag("foo\tBLAH\n");
  EXPECT_THROW(Lexicon::parse(bad_tag), ParseError);
  EXPECT_GT(Lexicon::builtin().size(), 100u);
}

TEST(Tagger, SuffixHeuristicsForUnknownWords) {
  auto tokens = TaskParser(Lexicon()).tag("Zorbing frobnication");
  ASSERT_EQ(tokens.size(), 2u);
  EXPECT_EQ(tokens[0].tag, PosTag::kVerb);
  EXPECT_EQ(tokens[1].tag, PosTag::kNoun);
}
