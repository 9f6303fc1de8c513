#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsplan/causal.hpp"
#include "nsplan/counterfactual.hpp"
#include "nsplan/dataset.hpp"
#include "nsplan/embedding.hpp"
#include "nsplan/generator.hpp"
#include "nsplan/knowledge_graph.hpp"
#include "nsplan/metrics.hpp"
#include "nsplan/planner.hpp"
#include "nsplan/symbolic_executor.hpp"
#include "nsplan/translator.hpp"

namespace nsplan {

enum class GeneratorKind { kRemote, kFollower, kScripted };
enum class EmbeddingKind { kHash, kTable, kRemote };

std::string_view to_string(GeneratorKind kind);
std::string_view to_string(EmbeddingKind kind);

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes of the batch commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitTaskFailed = 1;
inline constexpr int kExitConfig = 2;

struct RunConfig {
  PlannerConfig planner;

  GeneratorKind generator = GeneratorKind::kFollower;
  std::string endpoint;
  std::string model;
  /// Response file for the scripted generator.
  std::string scripted;
  /// Confidence schedule of the knowledge follower.
  std::vector<double> schedule;

  EmbeddingKind embedding = EmbeddingKind::kHash;
  std::size_t embedding_dim = 256;
  std::string embedding_table;
  std::string embedding_endpoint;

  std::string graph;
  GraphFormat graph_format = GraphFormat::kJsonl;
  std::string language = "en";
  std::string dataset;
  DatasetFormat format = DatasetFormat::kRobotHowJsonl;
  std::string admissible;
  std::string rules;
  std::string out;

  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  bool strict = false;

  /// Every key, with underscores (the CLI spells them with dashes).
  nlohmann::json to_json() const;
  /// Accepts a config document or a run manifest (its "config" member).
  /// Missing keys keep their defaults; unknown keys throw ConfigError.
  static RunConfig from_json(const nlohmann::json& j);
  static nlohmann::json read_document(const std::filesystem::path& path);
};

/// Builds the configured providers. Remote providers read the bearer token
/// from NSPLAN_API_KEY.
std::unique_ptr<EmbeddingProvider> make_embedder(const RunConfig& config);
std::unique_ptr<Generator> make_generator(const RunConfig& config);

KnowledgeGraph load_graph(const RunConfig& config, IngestStats* stats = nullptr);

/// Plans every task in the dataset, writing <out>/<id>.json per task and
/// <out>/manifest.json. Returns kExitOk, kExitTaskFailed (some task aborted)
/// or kExitConfig (nothing written).
int run_plan(const RunConfig& config, std::ostream& log);

/// Scores <predictions>/<id>.json files against the dataset named in the
/// config; writes metrics.json and metrics.txt to config.out when set.
/// Throws Error when ids do not line up or no predictions exist.
MetricReport run_eval(const RunConfig& config, const std::filesystem::path& predictions, std::ostream& log);

/// Per-task debugging view of the knowledge stages and the first prompt.
struct Inspection {
  std::string task;
  KnowledgeStages stages;
  Prompt prompt;

  std::string to_text() const;
  nlohmann::json to_json() const;
};

Inspection run_inspect(const RunConfig& config, const std::string& task);

struct CounterfactualOptions {
  std::vector<InterventionKind> kinds{InterventionKind::kInitialConfiguration, InterventionKind::kIntermediateStep,
                                      InterventionKind::kFinalGoal};
  /// Locations for initial-configuration samples; drawn uniformly per task.
  std::vector<std::string> locations;
};

InterventionKind parse_intervention_kind(std::string_view name);

/// One sample per task and requested kind; FinalGoal pairs each task with a
/// seeded random other task. Requires config.seed.
std::vector<CounterfactualSample> run_counterfactual(const RunConfig& config, const CounterfactualOptions& options);

}  // namespace nsplan
