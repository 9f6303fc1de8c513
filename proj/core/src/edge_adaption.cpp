#include "nsplan/edge_adaption.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "nsplan/errors.hpp"
#include "nsplan/text.hpp"

namespace nsplan {

namespace {

bool adapted_desc_less(const AdaptedTriplet& a, const AdaptedTriplet& b) {
  if (a.adapted_weight != b.adapted_weight) return a.adapted_weight > b.adapted_weight;
  return key_less(a.triplet, b.triplet);
}

}  // namespace

void AdaptionConfig::validate() const {
  if (!(edge_threshold >= 0.0)) throw ConfigError("edge_threshold", "must be >= 0");
  if (concept_ratio < 1) throw ConfigError("concept_ratio", "must be >= 1");
  if (!(cos_keep_threshold >= -1.0 && cos_keep_threshold <= 1.0)) {
    throw ConfigError("cos_keep_threshold", "must lie in [-1, 1]");
  }
}

std::size_t task_token_count(std::string_view task_text) { return word_tokens(task_text).size(); }

Subgraph adapt_weights(const Subgraph& subgraph, std::string_view task_text, const EmbeddingProvider& provider) {
  const Vector task = provider.embed(task_text);
  std::unordered_map<NodeKey, double> relevance;
  Subgraph out = subgraph;
  for (auto& t : out.triplets) {
    auto it = relevance.find(t.triplet.tail);
    if (it == relevance.end()) {
      double c = cosine(provider.embed(key_to_surface(t.triplet.tail)), task);
      it = relevance.emplace(t.triplet.tail, c).first;
    }
    t.relevance = it->second;
    t.adapted_weight = t.triplet.weight + it->second;
  }
  return out;
}

Subgraph select(const Subgraph& subgraph, const AdaptionConfig& config, std::string_view task_text) {
  config.validate();
  Subgraph out;
  out.anchors = subgraph.anchors;

  std::vector<AdaptedTriplet> survivors;
  for (const auto& t : subgraph.triplets) {
    if (t.adapted_weight >= config.edge_threshold && t.relevance >= config.cos_keep_threshold) {
      survivors.push_back(t);
    }
  }

  std::map<NodeKey, double> score;
  for (const auto& t : survivors) {
    auto [it, inserted] = score.emplace(t.triplet.tail, t.adapted_weight);
    if (!inserted) it->second = std::max(it->second, t.adapted_weight);
  }
  std::vector<std::pair<NodeKey, double>> ranked(score.begin(), score.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::size_t cap = std::min(config.top_k, config.concept_ratio * task_token_count(task_text));
  std::set<NodeKey> kept;
  for (std::size_t i = 0; i < ranked.size() && i < cap; ++i) kept.insert(ranked[i].first);

  for (auto& t : survivors) {
    if (kept.contains(t.triplet.tail)) out.triplets.push_back(std::move(t));
  }
  std::sort(out.triplets.begin(), out.triplets.end(), adapted_desc_less);
  return out;
}

}  // namespace nsplan
