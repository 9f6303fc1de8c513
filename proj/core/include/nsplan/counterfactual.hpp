#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsplan/dataset.hpp"

namespace nsplan {

enum class InterventionKind { kInitialConfiguration, kIntermediateStep, kFinalGoal };

std::string_view to_string(InterventionKind kind);

struct CounterfactualSample {
  InterventionKind kind = InterventionKind::kInitialConfiguration;
  TaskSample original;
  /// The second task of a FinalGoal composition.
  std::optional<TaskSample> second;
  TaskSample modified;
  /// The location, the sampled step, or the second task id.
  std::string intervention;

  nlohmann::json to_json() const;
};

/// Task becomes "<task> in <location>" and a walk step to the location is
/// prepended ("Walk to <location>", or "[Walk] <location> (1)" for
/// structured plans).
CounterfactualSample intervene_initial_configuration(const TaskSample& sample, std::string_view location);

/// Appends one uniformly drawn reference step to the task name as
/// "<task> (<Title Cased Step>)". Throws ContractError on an empty plan.
CounterfactualSample intervene_intermediate_step(const TaskSample& sample, std::uint64_t seed);

/// "<a> and <b>" with the plans concatenated. Throws ContractError when
/// either plan is empty.
CounterfactualSample intervene_final_goal(const TaskSample& a, const TaskSample& b);

/// "Step 1: ...", "Step 2: ...", in natural style.
std::vector<std::string> numbered_plan(const TaskSample& sample);

/// Capitalizes the first letter of every word.
std::string title_case(std::string_view text);

void write_counterfactual_jsonl(std::ostream& out, const std::vector<CounterfactualSample>& samples);

}  // namespace nsplan
