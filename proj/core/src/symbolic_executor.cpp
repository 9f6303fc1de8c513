#include "nsplan/symbolic_executor.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "nsplan/errors.hpp"
#include "nsplan/text.hpp"

namespace nsplan {

namespace {

void replace_all(std::string& text, std::string_view from, std::string_view to) {
  for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
}

bool adapted_desc_less(const AdaptedTriplet* a, const AdaptedTriplet* b) {
  if (a->adapted_weight != b->adapted_weight) return a->adapted_weight > b->adapted_weight;
  return key_less(a->triplet, b->triplet);
}

class Linearizer {
 public:
  Linearizer(const Subgraph& subgraph, const RuleSet& rules, int max_depth)
      : subgraph_(subgraph), rules_(rules), max_depth_(max_depth) {
    for (const auto& t : subgraph.triplets) {
      const auto* rule = rules.find(t.triplet.relation);
      if (rule == nullptr) throw UnmappedRelationError(t.triplet.relation.name());
      if (rule->phase == Phase::kBody) {
        body_.push_back(&t);
      } else {
        events_.push_back(&t);
      }
    }
    std::sort(body_.begin(), body_.end(), adapted_desc_less);
    std::sort(events_.begin(), events_.end(), adapted_desc_less);
  }

  ProceduralPrompt run() {
    auto roots = find_roots();
    visited_.insert(roots.begin(), roots.end());

    for (Phase phase : {Phase::kPrerequisite, Phase::kBody, Phase::kSubevent, Phase::kLastSubevent}) {
      if (phase == Phase::kBody) {
        for (const auto* t : body_) emit(*t);
        continue;
      }
      for (const auto* t : events_) {
        if (roots.contains(t->triplet.head) && rules_.find(t->triplet.relation)->phase == phase) follow(*t, 0);
      }
    }
    return std::move(prompt_);
  }

 private:
  std::set<NodeKey> find_roots() const {
    std::set<NodeKey> roots(subgraph_.anchors.begin(), subgraph_.anchors.end());
    if (!roots.empty()) {
      for (const auto& t : subgraph_.triplets) {
        if (t.triplet.relation.kind() != RelationType::Kind::kSynonym) continue;
        if (roots.contains(t.triplet.head)) roots.insert(t.triplet.tail);
        else if (roots.contains(t.triplet.tail)) roots.insert(t.triplet.head);
      }
      return roots;
    }
    std::set<NodeKey> tails;
    for (const auto* t : events_) tails.insert(t->triplet.tail);
    for (const auto* t : events_) {
      if (!tails.contains(t->triplet.head)) roots.insert(t->triplet.head);
    }
    return roots;
  }

  void emit(const AdaptedTriplet& t) {
    if (!used_.insert(&t).second) return;
    prompt_.add(verbalize_triplet(t.triplet, rules_));
  }

  void follow(const AdaptedTriplet& t, int depth) {
    if (depth >= max_depth_ || used_.contains(&t)) return;
    if (!visited_.insert(t.triplet.tail).second) return;
    emit(t);
    if (!rules_.find(t.triplet.relation)->recursive) return;
    for (const auto* child : events_) {
      if (child->triplet.head == t.triplet.tail && rules_.find(child->triplet.relation)->recursive) {
        follow(*child, depth + 1);
      }
    }
  }

  const Subgraph& subgraph_;
  const RuleSet& rules_;
  int max_depth_;
  std::vector<const AdaptedTriplet*> body_;
  std::vector<const AdaptedTriplet*> events_;
  std::set<NodeKey> visited_;
  std::set<const AdaptedTriplet*> used_;
  ProceduralPrompt prompt_;
};

}  // namespace

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::kPrerequisite: return "Prerequisite";
    case Phase::kBody: return "Body";
    case Phase::kSubevent: return "Subevent";
    case Phase::kLastSubevent: return "LastSubevent";
  }
  return "Body";
}

Phase parse_phase(std::string_view name) {
  for (Phase p : {Phase::kPrerequisite, Phase::kBody, Phase::kSubevent, Phase::kLastSubevent}) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError("phase", "unknown phase '" + std::string(name) + "'");
}

RuleSet RuleSet::defaults() {
  using K = RelationType::Kind;
  RuleSet set;
  set.set({RelationType(K::kHasPrerequisite), "{tail}", true, Phase::kPrerequisite});
  set.set({RelationType(K::kAtLocation), "go to the location of {head}", false, Phase::kBody});
  set.set({RelationType(K::kUsedFor), "go to find {tail} and use it for {head}", false, Phase::kBody});
  set.set({RelationType(K::kCapableOf), "{head} can {tail}", false, Phase::kBody});
  set.set({RelationType(K::kCauses), "{head} causes {tail}", false, Phase::kBody});
  set.set({RelationType(K::kCausesDesire), "{head} makes you want to {tail}", false, Phase::kBody});
  set.set({RelationType(K::kSynonym), "{head}, also known as {tail}", false, Phase::kBody});
  set.set({RelationType(K::kHasSubevent), "{tail}", true, Phase::kSubevent});
  set.set({RelationType(K::kHasLastSubevent), "{tail}", false, Phase::kLastSubevent});
  return set;
}

RuleSet RuleSet::parse_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("rules", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ConfigError("rules", "expected an array of rule objects");
  RuleSet set = defaults();
  for (const auto& entry : doc) {
    if (!entry.is_object() || !entry.contains("relation") || !entry["relation"].is_string() ||
        !entry.contains("template") || !entry["template"].is_string()) {
      throw ConfigError("rules", "each rule needs string fields \"relation\" and \"template\"");
    }
    SymbolicRule rule;
    rule.relation = RelationType::parse(entry["relation"].get<std::string>());
    rule.pattern = entry["template"].get<std::string>();
    rule.recursive = entry.value("recursive", false);
    rule.phase = parse_phase(entry.value("phase", std::string("Body")));
    set.set(std::move(rule));
  }
  return set;
}

RuleSet RuleSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("rules", "cannot open " + path.string());
  return parse_json(in);
}

void RuleSet::set(SymbolicRule rule) {
  for (auto& existing : rules_) {
    if (existing.relation == rule.relation) {
      existing = std::move(rule);
      return;
    }
  }
  rules_.push_back(std::move(rule));
}

const SymbolicRule* RuleSet::find(const RelationType& relation) const {
  for (const auto& rule : rules_) {
    if (rule.relation == relation) return &rule;
  }
  return nullptr;
}

bool ProceduralPrompt::add(std::string line) {
  if (std::find(lines.begin(), lines.end(), line) != lines.end()) return false;
  lines.push_back(std::move(line));
  return true;
}

std::vector<std::string> ProceduralPrompt::rendered() const {
  std::vector<std::string> out;
  out.reserve(lines.size());
  for (const auto& line : lines) out.push_back("Step: " + line + ".");
  return out;
}

std::string verbalize_triplet(const Triplet& triplet, const RuleSet& rules) {
  const auto* rule = rules.find(triplet.relation);
  if (rule == nullptr) throw UnmappedRelationError(triplet.relation.name());
  std::string text = rule->pattern;
  replace_all(text, "{head}", key_to_surface(triplet.head));
  replace_all(text, "{tail}", key_to_surface(triplet.tail));
  return text;
}

ProceduralPrompt build_knowledge_prompt(const Subgraph& subgraph, const RuleSet& rules, int max_depth) {
  return Linearizer(subgraph, rules, max_depth).run();
}

}  // namespace nsplan
