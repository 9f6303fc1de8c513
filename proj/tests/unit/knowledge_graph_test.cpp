#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include "nsplan/errors.hpp"
#include "nsplan/knowledge_graph.hpp"
#include "support.hpp"

using namespace nsplan;
using nsplan::testing::fixture;

namespace {

using K = RelationType::Kind;

IngestResult ingest_text(const std::string& text, IngestOptions options) {
  std::istringstream in(text);
  return ingest(in, options);
}

IngestResult ingest_file(const std::string& name, GraphFormat format, bool strict = false) {
  std::ifstream in(fixture(name));
  IngestOptions options;
  options.format = format;
  options.strict = strict;
  return ingest(in, options);
}

Triplet tr(std::string h, K k, std::string t, double w) { return {std::move(h), RelationType(k), std::move(t), w}; }

// Undirected BFS distances over all triplets whose relation is allowed.
std::map<NodeKey, int> bfs(const std::vector<Triplet>& triplets, const std::vector<NodeKey>& anchors) {
  std::map<NodeKey, int> dist;
  std::queue<NodeKey> q;
  for (const auto& a : anchors) {
    dist[a] = 0;
    q.push(a);
  }
  while (!q.empty()) {
    auto n = q.front();
    q.pop();
    for (const auto& t : triplets) {
      for (const auto& [x, y] : {std::pair{t.head, t.tail}, std::pair{t.tail, t.head}}) {
        if (x == n && !dist.contains(y)) {
          dist[y] = dist[n] + 1;
          q.push(y);
        }
      }
    }
  }
  return dist;
}

}  // namespace

TEST(Ingest, ConceptNetLineBecomesTriplet) {
  auto r = ingest_text(
      "/a/x\t/r/HasLastSubevent\t/c/en/take_a_shower\t/c/en/dry_off\t{\"weight\": 6.0}\n", {});
  ASSERT_EQ(r.graph.edge_count(), 1u);
  EXPECT_EQ(r.graph.triplets()[0], tr("take_a_shower", K::kHasLastSubevent, "dry_off", 6.0));
}

TEST(Ingest, SampleFileCountsEveryDropReason) {
  auto r = ingest_file("conceptnet_sample.tsv", GraphFormat::kConceptNetTsv);
  EXPECT_EQ(r.stats.lines, 11u);
  EXPECT_EQ(r.stats.kept, 4u);
  EXPECT_EQ(r.stats.dropped_relation, 5u);
  EXPECT_EQ(r.stats.dropped_language, 1u);
  EXPECT_EQ(r.stats.malformed, 1u);
  ASSERT_EQ(r.stats.issues.size(), 1u);
  EXPECT_EQ(r.stats.issues[0].line, 10u);
  EXPECT_TRUE(r.graph.find("book", RelationType(K::kAtLocation), "living_room"));
  EXPECT_FALSE(r.graph.contains_node("livre"));
  for (const auto& t : r.graph.triplets()) EXPECT_TRUE(t.relation.is_household()) << t.relation.name();
}

TEST(Ingest, BlacklistedRelationsAreDropped) {
  for (const char* rel : {"DistinctFrom", "DerivedFrom", "SymbolOf", "EtymologicallyRelatedTo",
                          "EtymologicallyDerivedFrom"}) {
    auto r = ingest_text(std::string("/a/x\t/r/") + rel + "\t/c/en/a\t/c/en/b\t{\"weight\": 1}\n", {});
    EXPECT_EQ(r.graph.edge_count(), 0u) << rel;
    EXPECT_EQ(r.stats.dropped_relation, 1u) << rel;
    EXPECT_FALSE(r.stats.warnings.empty());
  }
}

TEST(Ingest, FilterOffKeepsOtherRelations) {
  std::ifstream in(fixture("conceptnet_sample.tsv"));
  IngestOptions options;
  options.filter_relations = false;
  auto r = ingest(in, options);
  EXPECT_EQ(r.stats.kept, 9u);
  auto t = r.graph.find("showering", RelationType::parse("DerivedFrom"), "shower");
  ASSERT_TRUE(t);
  EXPECT_FALSE(t->relation.is_household());
}

TEST(Ingest, StrictModeStopsAtMalformedLine) {
  try {
    ingest_file("conceptnet_sample.tsv", GraphFormat::kConceptNetTsv, true);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 10u);
  }
}

TEST(Ingest, MalformedShapes) {
  IngestOptions strict;
  strict.strict = true;
  for (const char* bad : {"a\tb\tc\n", "/a/x\tHasA\t/c/en/a\t/c/en/b\t{\"weight\": 1}\n",
                          "/a/x\t/r/HasA\ten/a\t/c/en/b\t{\"weight\": 1}\n", "/a/x\t/r/HasA\t/c/en/a\t/c/en/b\t{}\n",
                          "/a/x\t/r/HasA\t/c/en/a\t/c/en/b\t{\"weight\": 0}\n", "/a/x\t/r/HasA\t/c/en/a\t/c/en/b\tnot json\n"}) {
    EXPECT_THROW(ingest_text(bad, strict), ParseError) << bad;
  }
}

TEST(Ingest, JsonlDuplicatesKeepMaxWeight) {
  IngestOptions options;
  options.format = GraphFormat::kJsonl;
  auto r = ingest_text(
      R"({"head": "a", "relation": "Causes", "tail": "b", "weight": 1.0}
{"head": "a", "relation": "Causes", "tail": "b", "weight": 3.0}
{"head": "a", "relation": "Causes", "tail": "b", "weight": 2.0}
)",
      options);
  ASSERT_EQ(r.graph.edge_count(), 1u);
  EXPECT_DOUBLE_EQ(r.graph.triplets()[0].weight, 3.0);
}

TEST(Ingest, JsonlSurfaceTextBecomesKeys) {
  auto r = ingest_file("take_shower_subgraph.jsonl", GraphFormat::kJsonl);
  EXPECT_EQ(r.stats.lines, 30u);
  EXPECT_EQ(r.stats.dropped_relation, 1u);  // MotivatedByGoal
  EXPECT_EQ(r.graph.edge_count(), 28u);     // one listed duplicate merges
  EXPECT_TRUE(r.graph.find("take_a_shower", RelationType(K::kHasPrerequisite), "take_out_your_clothes"));
}

TEST(Ingest, IsIdempotent) {
  std::ifstream in(fixture("take_shower_graph.jsonl"));
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  IngestOptions options;
  options.format = GraphFormat::kJsonl;
  auto once = ingest_text(text, options);
  auto twice = ingest_text(text + text, options);
  EXPECT_EQ(once.graph.triplets(), twice.graph.triplets());

  std::ostringstream out;
  write_jsonl(out, once.graph);
  auto round = ingest_text(out.str(), options);
  EXPECT_EQ(round.graph.triplets(), once.graph.triplets());
}

TEST(Graph, RejectsBadTriplets) {
  EXPECT_THROW(KnowledgeGraph::from_triplets({tr("", K::kCauses, "b", 1)}), ContractError);
  EXPECT_THROW(KnowledgeGraph::from_triplets({tr("a", K::kCauses, "b", 0)}), ContractError);
  EXPECT_THROW(KnowledgeGraph::from_triplets({tr("a", K::kCauses, "b", -1)}), ContractError);
}

TEST(Neighbors, TakeShowerIncludesPrerequisite) {
  auto g = ingest_file("take_shower_subgraph.jsonl", GraphFormat::kJsonl).graph;
  auto n = neighbors(g, "take_a_shower");
  EXPECT_NE(std::find(n.begin(), n.end(), tr("take_a_shower", K::kHasPrerequisite, "take_out_your_clothes", 4.47)),
            n.end());
  EXPECT_TRUE(neighbors(g, "nonexistent_node").empty());
  EXPECT_TRUE(std::is_sorted(n.begin(), n.end(), weight_desc_less));
  EXPECT_EQ(n, neighbors(g, "take_a_shower"));
}

TEST(Neighbors, RelationSubsetMatchesLinearScan) {
  std::vector<Triplet> ts{tr("book", K::kAtLocation, "living_room", 2), tr("book", K::kAtLocation, "bedroom", 1),
                          tr("book", K::kUsedFor, "reading", 3), tr("living_room", K::kUsedFor, "relax", 1),
                          tr("lamp", K::kAtLocation, "book", 1)};
  auto g = KnowledgeGraph::from_triplets(ts);
  auto got = neighbors(g, "book", std::vector{RelationType(K::kAtLocation)});
  std::vector<Triplet> expected;
  for (const auto& t : ts) {
    if (t.relation.kind() == K::kAtLocation && (t.head == "book" || t.tail == "book")) expected.push_back(t);
  }
  std::sort(expected.begin(), expected.end(), weight_desc_less);
  EXPECT_EQ(got, expected);
}

TEST(Sample, TakeShowerContainsIncomingPrerequisite) {
  auto g = ingest_file("take_shower_subgraph.jsonl", GraphFormat::kJsonl).graph;
  auto sub = sample_subgraph(g, {"take_a_shower"}, {3, 100, std::nullopt});
  bool found = false;
  for (const auto& t : sub.triplets) {
    if (t.triplet == tr("get_clean", K::kHasPrerequisite, "take_a_shower", 2.82)) {
      found = true;
      EXPECT_EQ(t.hop, 0);
    }
  }
  EXPECT_TRUE(found);
  EXPECT_EQ(sub.triplets.size(), g.edge_count());
}

TEST(Sample, ZeroHopsGivesEmptySubgraphWithAnchors) {
  auto g = KnowledgeGraph::from_triplets({tr("a", K::kCauses, "b", 1)});
  auto sub = sample_subgraph(g, {"a"}, {0, 100, std::nullopt});
  EXPECT_TRUE(sub.triplets.empty());
  EXPECT_EQ(sub.anchors, std::vector<NodeKey>{"a"});
}

TEST(Sample, ChainStopsAtRadius) {
  auto g = KnowledgeGraph::from_triplets(
      {tr("a", K::kCauses, "b", 1), tr("b", K::kCauses, "c", 1), tr("c", K::kCauses, "d", 1)});
  auto sub = sample_subgraph(g, {"a"}, {2, 100, std::nullopt});
  std::set<std::pair<NodeKey, NodeKey>> edges;
  for (const auto& t : sub.triplets) edges.emplace(t.triplet.head, t.triplet.tail);
  EXPECT_EQ(edges, (std::set<std::pair<NodeKey, NodeKey>>{{"a", "b"}, {"b", "c"}}));
}

TEST(Sample, FanoutCapKeepsStrongestEdges) {
  auto g = KnowledgeGraph::from_triplets({tr("a", K::kCauses, "x", 3), tr("a", K::kCauses, "y", 2),
                                          tr("a", K::kCauses, "z", 2), tr("a", K::kCauses, "w", 1)});
  auto sub = sample_subgraph(g, {"a"}, {1, 2, std::nullopt});
  ASSERT_EQ(sub.triplets.size(), 2u);
  EXPECT_EQ(sub.triplets[0].triplet.tail, "x");
  EXPECT_EQ(sub.triplets[1].triplet.tail, "y");  // tie with z broken by key
}

TEST(Sample, AbsentAnchorAndBadOptions) {
  auto g = KnowledgeGraph::from_triplets({tr("a", K::kCauses, "b", 1)});
  EXPECT_TRUE(sample_subgraph(g, {"zzz"}).triplets.empty());
  EXPECT_THROW(sample_subgraph(g, {"a"}, {-1, 100, std::nullopt}), ContractError);
  EXPECT_THROW(sample_subgraph(g, {"a"}, {1, 0, std::nullopt}), ContractError);
}

TEST(Sample, RandomGraphsRespectRadiusAndMembership) {
  std::mt19937_64 rng(7);
  const std::vector<K> kinds{K::kCauses, K::kUsedFor, K::kAtLocation, K::kHasSubevent};
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> node(0, 14);
    std::uniform_int_distribution<int> kind(0, 3);
    std::uniform_real_distribution<double> weight(0.1, 5.0);
    std::vector<Triplet> ts;
    for (int e = 0; e < 30; ++e) {
      ts.push_back(tr("n" + std::to_string(node(rng)), kinds[kind(rng)], "n" + std::to_string(node(rng)), weight(rng)));
    }
    auto g = KnowledgeGraph::from_triplets(ts);
    int hops = trial % 4;
    auto sub = sample_subgraph(g, {"n0", "n1"}, {hops, 100, std::nullopt});
    auto dist = bfs(g.triplets(), {"n0", "n1"});
    for (const auto& t : sub.triplets) {
      EXPECT_TRUE(g.find(t.triplet.head, t.triplet.relation, t.triplet.tail));
      int d = std::min(dist.at(t.triplet.head), dist.at(t.triplet.tail));
      EXPECT_LT(d, hops);
      EXPECT_EQ(t.hop, d);
    }
    // With no fan-out cap, every triplet touching a node closer than H is kept.
    std::size_t expected = 0;
    for (const auto& t : g.triplets()) {
      auto h = dist.find(t.head);
      auto tl = dist.find(t.tail);
      int d = std::min(h == dist.end() ? 1000 : h->second, tl == dist.end() ? 1000 : tl->second);
      if (d < hops) ++expected;
    }
    EXPECT_EQ(sub.triplets.size(), expected);
  }
}
