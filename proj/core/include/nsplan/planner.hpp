#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsplan/edge_adaption.hpp"
#include "nsplan/embedding.hpp"
#include "nsplan/errors.hpp"
#include "nsplan/generator.hpp"
#include "nsplan/knowledge_graph.hpp"
#include "nsplan/symbolic_executor.hpp"
#include "nsplan/task_parser.hpp"
#include "nsplan/translator.hpp"

namespace nsplan {

struct PlannerConfig {
  double theta = 0.7;
  int max_steps = 20;
  int hops = 3;
  std::size_t concept_ratio = 3;
  double cos_keep_threshold = 0.4;
  double edge_threshold = 0.6;
  std::size_t top_k = 10;

  std::size_t fanout_cap = 100;
  /// Recursion bound for the symbolic executor; unset follows hops.
  std::optional<int> max_depth;
  GenerationMode mode = GenerationMode::kAutoregressive;

  AdaptionConfig adaption() const;
  int effective_max_depth() const { return max_depth.value_or(hops); }
  void validate() const;

  friend bool operator==(const PlannerConfig&, const PlannerConfig&) = default;
};

struct Prompt {
  std::string task;
  std::vector<std::string> history;
  std::vector<std::string> knowledge;
  /// "Task: <task>", then "Step: <k>." per knowledge line, then
  /// "Step <j>: <s>." per history step; one per line.
  std::string rendered;
};

Prompt aggregate_prompt(std::string_view task, const std::vector<std::string>& history,
                        const std::vector<std::string>& knowledge);

/// The rendered prompt followed by the cue for the next step number.
std::string generation_prompt(const Prompt& prompt);

/// Everything computed once per task before the generation loop.
struct KnowledgeStages {
  EntitySet entities;
  Subgraph sampled;
  Subgraph adapted;
  Subgraph selected;
  ProceduralPrompt knowledge;
  PromptTranslation translated;
};

KnowledgeStages build_knowledge_stages(std::string_view task, const KnowledgeGraph& graph, const AdmissibleSet& set,
                                       const EmbeddingProvider& embedder, const PlannerConfig& config,
                                       const RuleSet& rules = RuleSet::defaults(),
                                       const TaskParser& parser = TaskParser());

enum class Termination { kMaxSteps, kBelowThreshold, kGeneratorExhausted };

std::string_view to_string(Termination termination);

struct PlanStep {
  AdmissibleStep step;
  /// min(generator confidence, translation confidence): the value tested
  /// against theta.
  double confidence = 0.0;
};

struct PlanResult {
  std::string task;
  std::vector<PlanStep> steps;
  std::optional<Termination> termination;
  nlohmann::json trace = nlohmann::json::array();

  std::vector<std::string> texts() const;
  nlohmann::json to_json() const;
};

/// A provider failed mid-plan. The partial result (steps and trace so far)
/// travels with the exception.
class PlanAborted : public Error {
 public:
  PlanAborted(PlanResult partial, const std::string& reason);
  const PlanResult& partial() const noexcept { return partial_; }

 private:
  PlanResult partial_;
};

/// Runs the whole pipeline for one task. A candidate is accepted when both
/// the generator confidence and the translation score reach theta.
PlanResult plan(std::string_view task, const KnowledgeGraph& graph, const AdmissibleSet& set,
                const Generator& generator, const EmbeddingProvider& embedder, const PlannerConfig& config,
                const RuleSet& rules = RuleSet::defaults());

/// The generation loop alone, given precomputed knowledge lines.
PlanResult run_generation_loop(std::string_view task, const std::vector<std::string>& knowledge,
                               const AdmissibleSet& set, const Generator& generator,
                               const EmbeddingProvider& embedder, const PlannerConfig& config);

}  // namespace nsplan
