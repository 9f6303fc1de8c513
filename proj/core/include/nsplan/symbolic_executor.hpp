#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "nsplan/knowledge_graph.hpp"

namespace nsplan {

enum class Phase { kPrerequisite, kBody, kSubevent, kLastSubevent };

std::string_view to_string(Phase phase);
Phase parse_phase(std::string_view name);

struct SymbolicRule {
  RelationType relation;
  /// Text with {head} and {tail} placeholders.
  std::string pattern;
  bool recursive = false;
  Phase phase = Phase::kBody;
};

/// One rule per relation.
class RuleSet {
 public:
  /// The built-in household rules.
  static RuleSet defaults();

  /// Reads [{"relation", "template", "recursive", "phase"}, ...] and applies
  /// each entry on top of the defaults.
  static RuleSet parse_json(std::istream& in);
  static RuleSet load(const std::filesystem::path& path);

  /// Replaces any existing rule for the same relation.
  void set(SymbolicRule rule);
  const SymbolicRule* find(const RelationType& relation) const;
  const std::vector<SymbolicRule>& rules() const noexcept { return rules_; }

 private:
  std::vector<SymbolicRule> rules_;
};

/// Knowledge lines without the "Step: " decoration. Duplicate lines are
/// ignored on insertion.
struct ProceduralPrompt {
  std::vector<std::string> lines;

  /// Returns false when the line was already present.
  bool add(std::string line);
  bool empty() const noexcept { return lines.empty(); }
  std::size_t size() const noexcept { return lines.size(); }
  /// "Step: <line>." per line.
  std::vector<std::string> rendered() const;

  friend bool operator==(const ProceduralPrompt&, const ProceduralPrompt&) = default;
};

/// Fills the relation's template with the head and tail surface text.
/// Throws UnmappedRelationError when the relation has no rule.
std::string verbalize_triplet(const Triplet& triplet, const RuleSet& rules);

/// Linearizes a selected subgraph.
///
/// Event relations (rules in the Prerequisite, Subevent and LastSubevent
/// phases) are followed outward from the roots: the anchors plus their
/// Synonym neighbours, or, without anchors, every event head that is not also
/// an event tail. Body relations are verbalized wherever they occur. Phases
/// are emitted in order Prerequisite, Body, Subevent, LastSubevent; inside a
/// phase, adapted weight descending then key. A recursive rule expands the
/// tail's own recursive triplets depth-first; a line at depth d (roots'
/// children have depth 0) is kept only while d < max_depth. Nodes are
/// visited once, so cycles end.
ProceduralPrompt build_knowledge_prompt(const Subgraph& subgraph, const RuleSet& rules, int max_depth = 3);

}  // namespace nsplan
