#include "nsplan/counterfactual.hpp"

#include <cctype>
#include <random>

#include "nsplan/errors.hpp"

namespace nsplan {

std::string_view to_string(InterventionKind kind) {
  switch (kind) {
    case InterventionKind::kInitialConfiguration: return "InitialConfiguration";
    case InterventionKind::kIntermediateStep: return "IntermediateStep";
    case InterventionKind::kFinalGoal: return "FinalGoal";
  }
  return "InitialConfiguration";
}

nlohmann::json CounterfactualSample::to_json() const {
  nlohmann::json j{{"kind", std::string(to_string(kind))}, {"original", original.to_json()}};
  if (second) j["second"] = second->to_json();
  j["modified"] = modified.to_json();
  j["intervention"] = intervention;
  return j;
}

std::string title_case(std::string_view text) {
  std::string out(text);
  bool word_start = true;
  for (char& c : out) {
    auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      if (word_start) c = static_cast<char>(std::toupper(uc));
      word_start = false;
    } else {
      word_start = true;
    }
  }
  return out;
}

CounterfactualSample intervene_initial_configuration(const TaskSample& sample, std::string_view location) {
  if (location.empty()) throw ContractError("initial configuration: location is empty");
  CounterfactualSample cf;
  cf.kind = InterventionKind::kInitialConfiguration;
  cf.original = sample;
  cf.intervention = std::string(location);
  cf.modified = sample;
  cf.modified.id = sample.id.empty() ? std::string() : sample.id + "-in-" + slugify(location);
  cf.modified.task = sample.task + " in " + std::string(location);
  std::string walk = sample.structured() ? render_step({"Walk", std::string(location), 1}, StepStyle::kDataset)
                                         : "Walk to " + std::string(location);
  cf.modified.reference_plan.insert(cf.modified.reference_plan.begin(), std::move(walk));
  return cf;
}

CounterfactualSample intervene_intermediate_step(const TaskSample& sample, std::uint64_t seed) {
  if (sample.reference_plan.empty()) throw ContractError("intermediate step: reference plan is empty");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, sample.reference_plan.size() - 1);
  const auto& step = sample.reference_plan[pick(rng)];

  CounterfactualSample cf;
  cf.kind = InterventionKind::kIntermediateStep;
  cf.original = sample;
  cf.intervention = step;
  cf.modified = sample;
  cf.modified.task = sample.task + " (" + title_case(natural_text(step)) + ")";
  cf.modified.id = sample.id.empty() ? std::string() : sample.id + "-" + slugify(natural_text(step));
  return cf;
}

CounterfactualSample intervene_final_goal(const TaskSample& a, const TaskSample& b) {
  if (a.reference_plan.empty() || b.reference_plan.empty()) {
    throw ContractError("final goal: both reference plans must be nonempty");
  }
  CounterfactualSample cf;
  cf.kind = InterventionKind::kFinalGoal;
  cf.original = a;
  cf.second = b;
  cf.intervention = b.id.empty() ? b.task : b.id;
  cf.modified = a;
  cf.modified.task = a.task + " and " + b.task;
  cf.modified.id = a.id.empty() && b.id.empty() ? std::string() : a.id + "-and-" + b.id;
  cf.modified.reference_plan.insert(cf.modified.reference_plan.end(), b.reference_plan.begin(),
                                    b.reference_plan.end());
  return cf;
}

std::vector<std::string> numbered_plan(const TaskSample& sample) {
  std::vector<std::string> out;
  out.reserve(sample.reference_plan.size());
  for (std::size_t i = 0; i < sample.reference_plan.size(); ++i) {
    out.push_back("Step " + std::to_string(i + 1) + ": " + natural_text(sample.reference_plan[i]));
  }
  return out;
}

void write_counterfactual_jsonl(std::ostream& out, const std::vector<CounterfactualSample>& samples) {
  for (const auto& s : samples) out << s.to_json().dump() << '\n';
}

}  // namespace nsplan
