#include "nsplan/planner.hpp"

#include <algorithm>

#include "nsplan/text.hpp"

namespace nsplan {

AdaptionConfig PlannerConfig::adaption() const {
  return AdaptionConfig{top_k, edge_threshold, concept_ratio, cos_keep_threshold};
}

void PlannerConfig::validate() const {
  if (!(theta >= -1.0 && theta <= 1.0)) throw ConfigError("theta", "must lie in [-1, 1]");
  if (max_steps < 0) throw ConfigError("max_steps", "must be >= 0");
  if (hops < 0) throw ConfigError("hops", "must be >= 0");
  if (fanout_cap < 1) throw ConfigError("fanout_cap", "must be >= 1");
  if (max_depth && *max_depth < 0) throw ConfigError("max_depth", "must be >= 0");
  adaption().validate();
}

Prompt aggregate_prompt(std::string_view task, const std::vector<std::string>& history,
                        const std::vector<std::string>& knowledge) {
  Prompt p{std::string(task), history, knowledge, {}};
  p.rendered = "Task: " + p.task + "\n";
  for (const auto& k : knowledge) p.rendered += "Step: " + k + ".\n";
  for (std::size_t j = 0; j < history.size(); ++j) {
    p.rendered += "Step " + std::to_string(j + 1) + ": " + history[j] + ".\n";
  }
  return p;
}

std::string generation_prompt(const Prompt& prompt) {
  return prompt.rendered + "Step " + std::to_string(prompt.history.size() + 1) + ":";
}

KnowledgeStages build_knowledge_stages(std::string_view task, const KnowledgeGraph& graph, const AdmissibleSet& set,
                                       const EmbeddingProvider& embedder, const PlannerConfig& config,
                                       const RuleSet& rules, const TaskParser& parser) {
  config.validate();
  KnowledgeStages s;
  s.entities = parser.parse_entities(task, &graph);
  s.sampled = sample_subgraph(graph, s.entities.keys(), SamplingOptions{config.hops, config.fanout_cap, std::nullopt});
  s.adapted = adapt_weights(s.sampled, task, embedder);
  s.selected = select(s.adapted, config.adaption(), task);
  s.knowledge = build_knowledge_prompt(s.selected, rules, config.effective_max_depth());
  s.translated = translate_prompt_traced(s.knowledge, set, embedder);
  return s;
}

std::string_view to_string(Termination termination) {
  switch (termination) {
    case Termination::kMaxSteps: return "MaxSteps";
    case Termination::kBelowThreshold: return "BelowThreshold";
    case Termination::kGeneratorExhausted: return "GeneratorExhausted";
  }
  return "MaxSteps";
}

std::vector<std::string> PlanResult::texts() const {
  std::vector<std::string> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.step.text);
  return out;
}

nlohmann::json PlanResult::to_json() const {
  nlohmann::json j;
  j["task"] = task;
  j["steps"] = nlohmann::json::array();
  for (const auto& s : steps) j["steps"].push_back({{"text", s.step.text}, {"confidence", s.confidence}});
  j["termination"] = termination ? nlohmann::json(std::string(to_string(*termination))) : nlohmann::json();
  j["trace"] = trace;
  return j;
}

PlanAborted::PlanAborted(PlanResult partial, const std::string& reason)
    : Error("plan aborted for task '" + partial.task + "': " + reason), partial_(std::move(partial)) {}

PlanResult run_generation_loop(std::string_view task, const std::vector<std::string>& knowledge,
                               const AdmissibleSet& set, const Generator& generator,
                               const EmbeddingProvider& embedder, const PlannerConfig& config) {
  if (set.empty()) throw ConfigError("admissible", "admissible set is empty");
  PlanResult result;
  result.task = std::string(task);
  std::vector<std::string> history;

  while (true) {
    if (static_cast<int>(result.steps.size()) >= config.max_steps) {
      result.termination = Termination::kMaxSteps;
      break;
    }
    auto prompt = aggregate_prompt(task, history, knowledge);
    GenerationRequest request;
    request.prompt = generation_prompt(prompt);
    request.mode = config.mode;
    request.history = history;
    request.knowledge = knowledge;

    nlohmann::json record{{"step", history.size() + 1}, {"prompt_fingerprint", fingerprint_hex(request.shaped_prompt())}};
    GenerationResult gen;
    Translation tr;
    try {
      gen = generator.next_step(request);
      record["generation"] = {{"text", gen.text},
                              {"confidence", gen.confidence},
                              {"confidence_defaulted", gen.confidence_defaulted},
                              {"raw", gen.raw}};
      if (gen.text.empty()) {
        record["accepted"] = false;
        record["reason"] = "GeneratorExhausted";
        result.trace.push_back(std::move(record));
        result.termination = Termination::kGeneratorExhausted;
        break;
      }
      tr = translate(gen.text, set, embedder);
    } catch (const TransportError& e) {
      record["error"] = e.what();
      result.trace.push_back(std::move(record));
      throw PlanAborted(std::move(result), e.what());
    } catch (const FixtureMissError& e) {
      record["error"] = e.what();
      result.trace.push_back(std::move(record));
      throw PlanAborted(std::move(result), e.what());
    }

    record["translation"] = {{"text", tr.step.text}, {"confidence", tr.confidence}};
    double score = std::min(gen.confidence, tr.confidence);
    if (score < config.theta) {
      record["accepted"] = false;
      record["reason"] = gen.confidence < config.theta ? "generator confidence below theta"
                                                       : "translation score below theta";
      result.trace.push_back(std::move(record));
      result.termination = Termination::kBelowThreshold;
      break;
    }
    record["accepted"] = true;
    result.trace.push_back(std::move(record));
    history.push_back(tr.step.text);
    result.steps.push_back({std::move(tr.step), score});
  }
  return result;
}

PlanResult plan(std::string_view task, const KnowledgeGraph& graph, const AdmissibleSet& set,
                const Generator& generator, const EmbeddingProvider& embedder, const PlannerConfig& config,
                const RuleSet& rules) {
  if (set.empty()) throw ConfigError("admissible", "admissible set is empty");
  KnowledgeStages stages;
  try {
    stages = build_knowledge_stages(task, graph, set, embedder, config, rules);
  } catch (const TransportError& e) {
    PlanResult partial;
    partial.task = std::string(task);
    throw PlanAborted(std::move(partial), e.what());
  }
  return run_generation_loop(task, stages.translated.prompt.lines, set, generator, embedder, config);
}

}  // namespace nsplan
