#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsplan/embedding.hpp"
#include "nsplan/transport_solver.hpp"

namespace nsplan {

inline constexpr double kBleuEpsilon = 1e-9;

/// BLEU over lowercase word tokens with n-grams up to min(4, |pred|),
/// uniform weights, brevity penalty, and zero match counts replaced by
/// kBleuEpsilon. Empty prediction gives 0.
double sentence_bleu(std::string_view pred, std::string_view ref);

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Unigram overlap with clipped counts.
RougeScore rouge1(std::string_view pred, std::string_view ref);
double rouge1_f1(std::string_view pred, std::string_view ref);

struct WmdResult {
  double distance = 0.0;
  double similarity = 1.0;
  std::vector<std::string> pred_tokens;
  std::vector<std::string> ref_tokens;
  std::vector<double> pred_mass;
  std::vector<double> ref_mass;
  TransportPlan plan;
};

/// Exact word mover's distance between normalized bags of unique tokens
/// with Euclidean ground cost on token embeddings. similarity = 1/(1+d).
/// Throws ContractError when either side has no tokens.
WmdResult wmd(std::string_view pred, std::string_view ref, const EmbeddingProvider& provider);

/// Greedy token matching: precision and recall are mean best cosines,
/// mapped by (x+1)/2, combined harmonically. Throws ContractError when either
/// side has no tokens.
double embed_match_f1(std::string_view pred, std::string_view ref, const EmbeddingProvider& provider);

/// Sample Pearson r. Throws ContractError on length mismatch or fewer than
/// two points, UndefinedCorrelationError on zero variance.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

struct SampleMetrics {
  std::string id;
  double s_bleu = 0.0;
  double rouge1_f1 = 0.0;
  /// Unset when the prediction is empty (the embedding metrics need tokens).
  std::optional<double> wmd_distance;
  std::optional<double> wmd_similarity;
  std::optional<double> embed_match_f1;
};

/// Scores one plan pair; both plans are joined with ". " first.
SampleMetrics evaluate_plans(std::string id, const std::vector<std::string>& pred, const std::vector<std::string>& ref,
                             const EmbeddingProvider& provider);

struct MetricMeans {
  double s_bleu = 0.0;
  double rouge1_f1 = 0.0;
  double wmd_distance = 0.0;
  double wmd_similarity = 0.0;
  double embed_match_f1 = 0.0;
};

struct MetricReport {
  std::vector<SampleMetrics> samples;
  MetricMeans means;
  std::size_t count = 0;
  /// Samples excluded from the embedding-metric means.
  std::size_t undefined_embedding = 0;

  static MetricReport from_samples(std::vector<SampleMetrics> samples);
  nlohmann::json to_json() const;
  /// Aligned plain-text table with a final "mean" row.
  std::string to_text() const;
};

}  // namespace nsplan
