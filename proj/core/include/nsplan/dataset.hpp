#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsplan/knowledge_graph.hpp"
#include "nsplan/translator.hpp"

namespace nsplan {

enum class StepStyle { kDataset, kNatural };

/// Parses "[Action] <Object> (N)", optionally prefixed by "N." or
/// "Step N:". Throws ParseError whose column (1-based) points at the first
/// offending character.
StructuredStep parse_robothow_step(std::string_view line);

/// True when `line` parses as a structured step.
bool is_robothow_step(std::string_view line);

/// Action name -> natural-language pattern with an "{object}" placeholder.
class ActionTemplates {
 public:
  /// The table shipped in core/data/action_templates.json.
  static const ActionTemplates& builtin();
  static ActionTemplates parse_json(std::istream& in);
  static ActionTemplates load(const std::filesystem::path& path);

  const std::string* find(std::string_view action) const;
  std::vector<std::string> actions() const;
  const std::map<std::string, std::string, std::less<>>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

/// Dataset style: "[Walk] <TELEVISION> (1)". Natural style: the action
/// pattern applied to the lowercased object with underscores as spaces
/// ("walk to television"). Unknown actions in natural style throw
/// ContractError listing the known ones.
std::string render_step(const StructuredStep& step, StepStyle style,
                        const ActionTemplates& templates = ActionTemplates::builtin());

/// Natural-style rendering of a plan line when it parses as a structured
/// step; the line itself otherwise.
std::string natural_text(std::string_view line, const ActionTemplates& templates = ActionTemplates::builtin());

enum class DatasetFormat { kRobotHowJsonl, kWikiHowJsonl, kCounterfactualJsonl };

DatasetFormat parse_dataset_format(std::string_view name);
std::string_view to_string(DatasetFormat format);

struct TaskSample {
  std::string id;
  std::string task;
  /// Dataset-style lines for robothow, free text for wikihow.
  std::vector<std::string> reference_plan;
  std::string domain = "robothow";

  bool structured() const noexcept { return domain == "robothow"; }
  nlohmann::json to_json() const;
  static TaskSample from_json(const nlohmann::json& j);

  friend bool operator==(const TaskSample&, const TaskSample&) = default;
};

/// Lowercase alphanumeric words joined by '-'.
std::string slugify(std::string_view text);

struct DatasetLoad {
  std::vector<TaskSample> samples;
  std::vector<LineIssue> issues;
};

/// robothow-jsonl: {"task", "steps": [dataset-style]}; wikihow-jsonl:
/// {"title", "headlines"}; counterfactual-jsonl: the "modified" sample of
/// each record. An optional "id" field names the task; otherwise the slug of
/// the task name, with -2, -3, ... on repeats. Schema violations throw
/// ParseError in strict mode and are recorded and skipped otherwise.
DatasetLoad load_task_dataset(std::istream& in, DatasetFormat format, bool strict = true);
DatasetLoad load_task_dataset(const std::filesystem::path& path, DatasetFormat format, bool strict = true);

void write_robothow_jsonl(std::ostream& out, const std::vector<TaskSample>& samples);

}  // namespace nsplan
