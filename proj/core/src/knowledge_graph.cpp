#include "nsplan/knowledge_graph.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <deque>
#include <map>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "nsplan/errors.hpp"
#include "nsplan/text.hpp"

namespace nsplan {

namespace {

using Kind = RelationType::Kind;

constexpr std::array<std::pair<Kind, std::string_view>, 9> kNamedRelations{{
    {Kind::kSynonym, "Synonym"},
    {Kind::kAtLocation, "AtLocation"},
    {Kind::kCapableOf, "CapableOf"},
    {Kind::kCauses, "Causes"},
    {Kind::kCausesDesire, "CausesDesire"},
    {Kind::kHasPrerequisite, "HasPrerequisite"},
    {Kind::kHasSubevent, "HasSubevent"},
    {Kind::kHasLastSubevent, "HasLastSubevent"},
    {Kind::kUsedFor, "UsedFor"},
}};

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

// "/c/en/take_a_shower/n/..." -> {"en", "take_a_shower"}
std::optional<std::pair<std::string, std::string>> parse_concept_uri(std::string_view uri) {
  auto parts = split(uri, '/');
  if (parts.size() < 4 || !parts[0].empty() || parts[1] != "c" || parts[2].empty() || parts[3].empty()) {
    return std::nullopt;
  }
  return std::make_pair(std::string(parts[2]), to_lower(parts[3]));
}

std::string jsonl_key(std::string_view text) {
  std::string key;
  bool pending_sep = false;
  for (char c : trim(text)) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '_') {
      pending_sep = true;
      continue;
    }
    if (pending_sep && !key.empty()) key.push_back('_');
    pending_sep = false;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return key;
}

struct ParsedLine {
  std::optional<Triplet> triplet;
  bool language_mismatch = false;
};

ParsedLine parse_tsv_line(std::string_view line, const IngestOptions& options, std::size_t line_no) {
  auto columns = split(line, '\t');
  if (columns.size() != 5) {
    throw ParseError("expected 5 tab-separated columns, found " + std::to_string(columns.size()), line_no, 0);
  }
  if (columns[1].substr(0, 3) != "/r/" || columns[1].size() <= 3) {
    throw ParseError("relation URI must start with /r/", line_no, 0);
  }
  auto start = parse_concept_uri(columns[2]);
  auto end = parse_concept_uri(columns[3]);
  if (!start || !end) throw ParseError("concept URIs must look like /c/<lang>/<term>", line_no, 0);

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(columns[4]);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("metadata is not valid JSON: ") + e.what(), line_no, 0);
  }
  if (!meta.is_object() || !meta.contains("weight") || !meta["weight"].is_number()) {
    throw ParseError("metadata lacks numeric field \"weight\"", line_no, 0);
  }
  double weight = meta["weight"].get<double>();
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw ParseError("weight must be positive", line_no, 0);
  }

  ParsedLine parsed;
  if (start->first != options.language || end->first != options.language) {
    parsed.language_mismatch = true;
    return parsed;
  }
  parsed.triplet = Triplet{start->second, RelationType::parse(columns[1]), end->second, weight};
  return parsed;
}

ParsedLine parse_jsonl_line(std::string_view line, std::size_t line_no) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_no, 0);
  }
  auto string_field = [&](const char* name) {
    if (!obj.is_object() || !obj.contains(name) || !obj[name].is_string()) {
      throw ParseError(std::string("missing string field \"") + name + "\"", line_no, 0);
    }
    return obj[name].get<std::string>();
  };
  auto head = jsonl_key(string_field("head"));
  auto relation = string_field("relation");
  auto tail = jsonl_key(string_field("tail"));
  if (!obj.contains("weight") || !obj["weight"].is_number()) {
    throw ParseError("missing numeric field \"weight\"", line_no, 0);
  }
  double weight = obj["weight"].get<double>();
  if (head.empty() || tail.empty()) throw ParseError("head and tail must be nonempty", line_no, 0);
  if (!(weight > 0.0) || !std::isfinite(weight)) throw ParseError("weight must be positive", line_no, 0);
  return ParsedLine{Triplet{head, RelationType::parse(relation), tail, weight}, false};
}

}  // namespace

RelationType::RelationType(Kind kind) : kind_(kind) {
  for (const auto& [k, name] : kNamedRelations) {
    if (k == kind) {
      name_ = std::string(name);
      return;
    }
  }
  throw ContractError("RelationType(Kind::kOther) needs a label; use RelationType::other");
}

RelationType RelationType::parse(std::string_view name) {
  if (name.substr(0, 3) == "/r/") name.remove_prefix(3);
  for (const auto& [kind, known] : kNamedRelations) {
    if (known == name) return RelationType(kind);
  }
  return other(std::string(name));
}

RelationType RelationType::other(std::string label) {
  RelationType r;
  r.kind_ = Kind::kOther;
  r.name_ = std::move(label);
  return r;
}

std::span<const RelationType> household_relations() {
  static const std::vector<RelationType> kRelations = [] {
    std::vector<RelationType> out;
    for (const auto& entry : kNamedRelations) out.emplace_back(entry.first);
    return out;
  }();
  return kRelations;
}

bool key_less(const Triplet& a, const Triplet& b) {
  if (a.head != b.head) return a.head < b.head;
  if (a.relation != b.relation) return a.relation < b.relation;
  return a.tail < b.tail;
}

bool weight_desc_less(const Triplet& a, const Triplet& b) {
  if (a.weight != b.weight) return a.weight > b.weight;
  return key_less(a, b);
}

KnowledgeGraph KnowledgeGraph::from_triplets(std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.head.empty() || t.tail.empty()) throw ContractError("triplet nodes must be nonempty");
    if (!(t.weight > 0.0)) throw ContractError("triplet weight must be positive: " + t.head + " -> " + t.tail);
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    if (key_less(a, b)) return true;
    if (key_less(b, a)) return false;
    return a.weight > b.weight;
  });
  // Sorted with the heaviest duplicate first, so unique() keeps the max.
  auto last = std::unique(triplets.begin(), triplets.end(),
                          [](const Triplet& a, const Triplet& b) { return !key_less(a, b) && !key_less(b, a); });
  triplets.erase(last, triplets.end());

  KnowledgeGraph graph;
  graph.triplets_ = std::move(triplets);
  for (std::size_t i = 0; i < graph.triplets_.size(); ++i) {
    const auto& t = graph.triplets_[i];
    graph.adjacency_[t.head].push_back(i);
    if (t.tail != t.head) graph.adjacency_[t.tail].push_back(i);
  }
  for (auto& [node, indices] : graph.adjacency_) {
    std::sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
      return weight_desc_less(graph.triplets_[a], graph.triplets_[b]);
    });
  }
  return graph;
}

bool KnowledgeGraph::contains_node(std::string_view key) const {
  return adjacency_.find(std::string(key)) != adjacency_.end();
}

std::span<const std::size_t> KnowledgeGraph::incident(std::string_view node) const {
  auto it = adjacency_.find(std::string(node));
  if (it == adjacency_.end()) return {};
  return it->second;
}

std::optional<Triplet> KnowledgeGraph::find(std::string_view head, const RelationType& relation,
                                            std::string_view tail) const {
  Triplet probe{std::string(head), relation, std::string(tail), 1.0};
  auto it = std::lower_bound(triplets_.begin(), triplets_.end(), probe, key_less);
  if (it != triplets_.end() && !key_less(probe, *it)) return *it;
  return std::nullopt;
}

GraphFormat parse_graph_format(std::string_view name) {
  if (name == "conceptnet-tsv") return GraphFormat::kConceptNetTsv;
  if (name == "jsonl") return GraphFormat::kJsonl;
  throw ConfigError("graph_format", "unknown graph format '" + std::string(name) + "' (expected conceptnet-tsv or jsonl)");
}

IngestResult ingest(std::istream& source, const IngestOptions& options) {
  IngestResult result;
  auto& stats = result.stats;
  std::vector<Triplet> kept;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++stats.lines;
    ParsedLine parsed;
    try {
      parsed = options.format == GraphFormat::kConceptNetTsv ? parse_tsv_line(line, options, line_no)
                                                              : parse_jsonl_line(line, line_no);
    } catch (const ParseError& e) {
      if (options.strict) throw;
      ++stats.malformed;
      stats.issues.push_back({line_no, e.detail()});
      continue;
    }
    if (parsed.language_mismatch) {
      ++stats.dropped_language;
      continue;
    }
    if (options.filter_relations && !parsed.triplet->relation.is_household()) {
      ++stats.dropped_relation;
      continue;
    }
    kept.push_back(std::move(*parsed.triplet));
  }
  stats.kept = kept.size();
  result.graph = KnowledgeGraph::from_triplets(std::move(kept));
  if (result.graph.edge_count() == 0) {
    stats.warnings.push_back("ingestion produced an empty graph");
  }
  return result;
}

void write_jsonl(std::ostream& out, const KnowledgeGraph& graph) {
  for (const auto& t : graph.triplets()) {
    nlohmann::json obj{{"head", t.head}, {"relation", t.relation.name()}, {"tail", t.tail}, {"weight", t.weight}};
    out << obj.dump() << '\n';
  }
}

std::vector<Triplet> neighbors(const KnowledgeGraph& graph, std::string_view node,
                               const std::optional<std::vector<RelationType>>& relations) {
  std::vector<Triplet> out;
  for (std::size_t index : graph.incident(node)) {
    const auto& t = graph.triplets()[index];
    if (relations && std::find(relations->begin(), relations->end(), t.relation) == relations->end()) continue;
    out.push_back(t);
  }
  return out;
}

Subgraph sample_subgraph(const KnowledgeGraph& graph, const std::vector<NodeKey>& anchors,
                         const SamplingOptions& options) {
  if (options.hops < 0) throw ContractError("hops must be >= 0");
  if (options.fanout_cap < 1) throw ContractError("fanout cap must be >= 1");

  std::vector<RelationType> allowed = options.relations.value_or(
      std::vector<RelationType>(household_relations().begin(), household_relations().end()));

  Subgraph sub;
  std::set<NodeKey> seen_anchor;
  for (const auto& a : anchors) {
    if (seen_anchor.insert(a).second) sub.anchors.push_back(a);
  }

  std::map<NodeKey, int> distance;
  std::deque<NodeKey> frontier;
  for (const auto& a : sub.anchors) {
    if (!graph.contains_node(a)) continue;
    distance.emplace(a, 0);
    frontier.push_back(a);
  }

  std::set<std::size_t> collected;
  while (!frontier.empty()) {
    NodeKey node = std::move(frontier.front());
    frontier.pop_front();
    int d = distance.at(node);
    if (d >= options.hops) continue;
    std::size_t followed = 0;
    for (std::size_t index : graph.incident(node)) {
      if (followed == options.fanout_cap) break;
      const auto& t = graph.triplets()[index];
      if (std::find(allowed.begin(), allowed.end(), t.relation) == allowed.end()) continue;
      ++followed;
      collected.insert(index);
      const NodeKey& other = t.head == node ? t.tail : t.head;
      if (distance.emplace(other, d + 1).second) frontier.push_back(other);
    }
  }

  for (std::size_t index : collected) {
    const auto& t = graph.triplets()[index];
    int hop = std::min(distance.at(t.head), distance.at(t.tail));
    sub.triplets.push_back(AdaptedTriplet{t, t.weight, 0.0, hop});
  }
  std::sort(sub.triplets.begin(), sub.triplets.end(),
            [](const AdaptedTriplet& a, const AdaptedTriplet& b) { return weight_desc_less(a.triplet, b.triplet); });
  return sub;
}

}  // namespace nsplan
