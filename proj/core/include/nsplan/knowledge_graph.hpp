#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nsplan {

using NodeKey = std::string;

/// ConceptNet relation. The nine household relations are named; anything
/// else is carried as Other with its original label.
class RelationType {
 public:
  enum class Kind {
    kSynonym,
    kAtLocation,
    kCapableOf,
    kCauses,
    kCausesDesire,
    kHasPrerequisite,
    kHasSubevent,
    kHasLastSubevent,
    kUsedFor,
    kOther,
  };

  RelationType() = default;
  explicit RelationType(Kind kind);

  /// Accepts a bare name ("AtLocation") or a URI ("/r/AtLocation").
  static RelationType parse(std::string_view name);
  static RelationType other(std::string label);

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  bool is_household() const noexcept { return kind_ != Kind::kOther; }

  friend bool operator==(const RelationType& a, const RelationType& b) { return a.name_ == b.name_; }
  friend auto operator<=>(const RelationType& a, const RelationType& b) { return a.name_ <=> b.name_; }

 private:
  Kind kind_ = Kind::kOther;
  std::string name_;
};

/// The household whitelist, in declaration order.
std::span<const RelationType> household_relations();

struct Triplet {
  NodeKey head;
  RelationType relation;
  NodeKey tail;
  double weight = 1.0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Orders by (head, relation name, tail), ignoring weight.
bool key_less(const Triplet& a, const Triplet& b);

/// Weight descending, then key_less. The store's canonical "strongest first"
/// order.
bool weight_desc_less(const Triplet& a, const Triplet& b);

/// Immutable triplet store with an undirected adjacency index.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  /// Builds from arbitrary triplets. Duplicate (head, relation, tail) keys keep
  /// the maximum weight. Throws ContractError on empty nodes or weight <= 0.
  static KnowledgeGraph from_triplets(std::vector<Triplet> triplets);

  /// Triplets in key_less order.
  const std::vector<Triplet>& triplets() const noexcept { return triplets_; }
  std::size_t node_count() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return triplets_.size(); }
  bool contains_node(std::string_view key) const;

  /// Indices into triplets() incident to `node` in either direction, in
  /// weight_desc_less order. Empty for unknown nodes.
  std::span<const std::size_t> incident(std::string_view node) const;

  std::optional<Triplet> find(std::string_view head, const RelationType& relation,
                              std::string_view tail) const;

 private:
  std::vector<Triplet> triplets_;
  std::unordered_map<NodeKey, std::vector<std::size_t>> adjacency_;
};

// ---------------------------------------------------------------------------
// Ingestion

enum class GraphFormat { kConceptNetTsv, kJsonl };

GraphFormat parse_graph_format(std::string_view name);

struct IngestOptions {
  GraphFormat format = GraphFormat::kConceptNetTsv;
  /// ISO code matched against `/c/<lang>/` URIs. Ignored for jsonl.
  std::string language = "en";
  bool filter_relations = true;
  /// Strict mode throws ParseError on the first malformed line; lenient mode
  /// skips and counts it.
  bool strict = false;
};

struct LineIssue {
  std::size_t line = 0;
  std::string message;
};

struct IngestStats {
  std::size_t lines = 0;
  std::size_t kept = 0;
  std::size_t dropped_language = 0;
  std::size_t dropped_relation = 0;
  std::size_t malformed = 0;
  std::vector<LineIssue> issues;
  std::vector<std::string> warnings;
};

struct IngestResult {
  KnowledgeGraph graph;
  IngestStats stats;
};

IngestResult ingest(std::istream& source, const IngestOptions& options);

/// Writes the graph in the jsonl interchange format (one triplet per line).
void write_jsonl(std::ostream& out, const KnowledgeGraph& graph);

// ---------------------------------------------------------------------------
// Queries

/// All triplets touching `node` whose relation is in `relations` (all
/// relations when unset), weight descending then lexicographic.
std::vector<Triplet> neighbors(const KnowledgeGraph& graph, std::string_view node,
                               const std::optional<std::vector<RelationType>>& relations = std::nullopt);

struct AdaptedTriplet {
  Triplet triplet;
  double adapted_weight = 0.0;
  /// Cosine between the tail text and the task, recorded by adapt_weights.
  double relevance = 0.0;
  /// Smaller BFS distance of the triplet's two endpoints from the anchors.
  int hop = 0;

  friend bool operator==(const AdaptedTriplet&, const AdaptedTriplet&) = default;
};

struct Subgraph {
  std::vector<AdaptedTriplet> triplets;
  std::vector<NodeKey> anchors;

  friend bool operator==(const Subgraph&, const Subgraph&) = default;
};

struct SamplingOptions {
  int hops = 3;
  std::size_t fanout_cap = 100;
  /// Relations that may be traversed; defaults to the household whitelist.
  std::optional<std::vector<RelationType>> relations;
};

/// Multi-source breadth-first expansion from `anchors` over undirected edges.
/// Each node closer than `hops` follows its `fanout_cap` strongest incident
/// triplets. Output is in weight_desc_less order with adapted_weight = weight.
Subgraph sample_subgraph(const KnowledgeGraph& graph, const std::vector<NodeKey>& anchors,
                         const SamplingOptions& options = {});

}  // namespace nsplan
