#pragma once

#include <cstddef>
#include <string_view>

#include "nsplan/embedding.hpp"
#include "nsplan/knowledge_graph.hpp"

namespace nsplan {

struct AdaptionConfig {
  std::size_t top_k = 10;
  double edge_threshold = 0.6;
  std::size_t concept_ratio = 3;
  double cos_keep_threshold = 0.4;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  friend bool operator==(const AdaptionConfig&, const AdaptionConfig&) = default;
};

/// adapted_weight = weight + cosine(embed(tail surface), embed(task)).
/// Triplet order and original weights are left untouched.
Subgraph adapt_weights(const Subgraph& subgraph, std::string_view task_text, const EmbeddingProvider& provider);

/// Keeps triplets with adapted_weight >= edge_threshold whose tail relevance
/// reaches cos_keep_threshold, then keeps only the tail nodes ranked in the
/// top min(top_k, concept_ratio * task word count) by their best incident
/// adapted weight. Output is adapted weight descending, ties by key.
Subgraph select(const Subgraph& subgraph, const AdaptionConfig& config, std::string_view task_text);

/// Number of word tokens in a task name (the "task length" of the concept cap).
std::size_t task_token_count(std::string_view task_text);

}  // namespace nsplan
