#include "nsplan/dataset.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "nsplan/embedded_data.hpp"
#include "nsplan/errors.hpp"
#include "nsplan/text.hpp"

namespace nsplan {

namespace {

class StepScanner {
 public:
  explicit StepScanner(std::string_view text) : text_(text) {}

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  std::size_t column() const { return pos_ + 1; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, 0, column());
  }

  void skip_spaces() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  void expect(char c, const char* what) {
    if (peek() != c) fail(std::string("expected ") + what);
    ++pos_;
  }

  void expect_spaces() {
    if (at_end() || !std::isspace(static_cast<unsigned char>(peek()))) fail("expected whitespace");
    skip_spaces();
  }

  std::string until(char close, const char* what) {
    std::size_t start = pos_;
    while (!at_end() && peek() != close) ++pos_;
    if (at_end()) fail(std::string("unterminated ") + what);
    if (pos_ == start) fail(std::string("empty ") + what);
    return std::string(text_.substr(start, pos_ - start));
  }

  std::optional<long long> digits() {
    std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (pos_ == start) return std::nullopt;
    auto run = text_.substr(start, pos_ - start);
    if (run.size() > 9) {
      pos_ = start;
      fail("number too large");
    }
    return std::stoll(std::string(run));
  }

  // Optional "N." or "Step N:" index.
  void skip_index() {
    std::size_t save = pos_;
    if (text_.substr(pos_, 4) == "Step") {
      pos_ += 4;
      skip_spaces();
      if (digits() && peek() == ':') {
        ++pos_;
        skip_spaces();
        return;
      }
      pos_ = save;
      return;
    }
    if (digits() && peek() == '.') {
      ++pos_;
      skip_spaces();
      return;
    }
    pos_ = save;
  }

  std::size_t pos_ = 0;

 private:
  std::string_view text_;
};

std::string object_surface(std::string_view object) {
  std::string out = to_lower(object);
  for (char& c : out) {
    if (c == '_') c = ' ';
  }
  return out;
}

nlohmann::json parse_line(const std::string& line, std::size_t line_no) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_no, 0);
  }
}

std::vector<std::string> string_list(const nlohmann::json& obj, const char* field, std::size_t line_no) {
  if (!obj.contains(field) || !obj[field].is_array()) {
    throw ParseError(std::string("missing array field \"") + field + "\"", line_no, 0);
  }
  std::vector<std::string> out;
  for (const auto& v : obj[field]) {
    if (!v.is_string()) throw ParseError(std::string("\"") + field + "\" must hold strings", line_no, 0);
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string string_field(const nlohmann::json& obj, const char* field, std::size_t line_no) {
  if (!obj.contains(field) || !obj[field].is_string()) {
    throw ParseError(std::string("missing string field \"") + field + "\"", line_no, 0);
  }
  return obj[field].get<std::string>();
}

TaskSample sample_from_line(const nlohmann::json& obj, DatasetFormat format, std::size_t line_no) {
  if (!obj.is_object()) throw ParseError("expected a JSON object", line_no, 0);
  TaskSample s;
  switch (format) {
    case DatasetFormat::kRobotHowJsonl:
      s.task = string_field(obj, "task", line_no);
      s.reference_plan = string_list(obj, "steps", line_no);
      s.domain = "robothow";
      for (std::size_t i = 0; i < s.reference_plan.size(); ++i) {
        try {
          parse_robothow_step(s.reference_plan[i]);
        } catch (const ParseError& e) {
          throw ParseError("step " + std::to_string(i + 1) + ": " + e.detail(), line_no, e.column());
        }
      }
      break;
    case DatasetFormat::kWikiHowJsonl:
      s.task = string_field(obj, "title", line_no);
      s.reference_plan = string_list(obj, "headlines", line_no);
      s.domain = "wikihow";
      break;
    case DatasetFormat::kCounterfactualJsonl:
      if (!obj.contains("modified") || !obj["modified"].is_object()) {
        throw ParseError("missing object field \"modified\"", line_no, 0);
      }
      try {
        s = TaskSample::from_json(obj["modified"]);
      } catch (const Error& e) {
        throw ParseError(e.what(), line_no, 0);
      }
      break;
  }
  if (obj.contains("id") && obj["id"].is_string() && format != DatasetFormat::kCounterfactualJsonl) {
    s.id = obj["id"].get<std::string>();
  }
  return s;
}

}  // namespace

StructuredStep parse_robothow_step(std::string_view line) {
  StepScanner scan(line);
  scan.skip_spaces();
  scan.skip_index();
  StructuredStep step;
  scan.expect('[', "'['");
  step.action = scan.until(']', "action");
  scan.expect(']', "']'");
  scan.expect_spaces();
  scan.expect('<', "'<'");
  step.object = scan.until('>', "object");
  scan.expect('>', "'>'");
  scan.expect_spaces();
  scan.expect('(', "'('");
  auto n = scan.digits();
  if (!n) scan.fail("expected instance number");
  scan.expect(')', "')'");
  scan.skip_spaces();
  if (!scan.at_end()) scan.fail("unexpected trailing text");
  if (*n < 1) throw ParseError("instance must be positive", 0, scan.column() - 1);
  step.instance = static_cast<int>(*n);
  return step;
}

bool is_robothow_step(std::string_view line) {
  try {
    parse_robothow_step(line);
    return true;
  } catch (const ParseError&) {
    return false;
  }
}

const ActionTemplates& ActionTemplates::builtin() {
  static const ActionTemplates kTemplates = [] {
    std::istringstream in{std::string(embedded::action_templates_json())};
    return parse_json(in);
  }();
  return kTemplates;
}

ActionTemplates ActionTemplates::parse_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("templates", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("templates", "expected an object of action -> pattern");
  ActionTemplates t;
  for (const auto& [action, pattern] : doc.items()) {
    if (!pattern.is_string()) throw ConfigError("templates", "pattern for '" + action + "' is not a string");
    t.entries_[action] = pattern.get<std::string>();
  }
  return t;
}

ActionTemplates ActionTemplates::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("templates", "cannot open " + path.string());
  return parse_json(in);
}

const std::string* ActionTemplates::find(std::string_view action) const {
  auto it = entries_.find(action);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> ActionTemplates::actions() const {
  std::vector<std::string> out;
  for (const auto& [action, pattern] : entries_) out.push_back(action);
  return out;
}

std::string render_step(const StructuredStep& step, StepStyle style, const ActionTemplates& templates) {
  if (style == StepStyle::kDataset) {
    return "[" + step.action + "] <" + step.object + "> (" + std::to_string(step.instance) + ")";
  }
  const auto* pattern = templates.find(step.action);
  if (pattern == nullptr) {
    std::string known;
    for (const auto& a : templates.actions()) known += (known.empty() ? "" : ", ") + a;
    throw ContractError("no natural-language template for action '" + step.action + "'; known actions: " + known);
  }
  std::string text = *pattern;
  auto pos = text.find("{object}");
  auto object = object_surface(step.object);
  if (pos == std::string::npos) return text + " " + object;
  return text.replace(pos, 8, object);
}

std::string natural_text(std::string_view line, const ActionTemplates& templates) {
  try {
    return render_step(parse_robothow_step(line), StepStyle::kNatural, templates);
  } catch (const ParseError&) {
    return std::string(line);
  }
}

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "robothow-jsonl") return DatasetFormat::kRobotHowJsonl;
  if (name == "wikihow-jsonl") return DatasetFormat::kWikiHowJsonl;
  if (name == "counterfactual-jsonl") return DatasetFormat::kCounterfactualJsonl;
  throw ConfigError("format", "unknown dataset format '" + std::string(name) +
                                  "' (expected robothow-jsonl, wikihow-jsonl or counterfactual-jsonl)");
}

std::string_view to_string(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::kRobotHowJsonl: return "robothow-jsonl";
    case DatasetFormat::kWikiHowJsonl: return "wikihow-jsonl";
    case DatasetFormat::kCounterfactualJsonl: return "counterfactual-jsonl";
  }
  return "robothow-jsonl";
}

nlohmann::json TaskSample::to_json() const {
  return {{"id", id}, {"task", task}, {"steps", reference_plan}, {"domain", domain}};
}

TaskSample TaskSample::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("task") || !j["task"].is_string() || !j.contains("steps") ||
      !j["steps"].is_array()) {
    throw Error("task sample needs \"task\" and \"steps\"");
  }
  TaskSample s;
  s.id = j.value("id", std::string());
  s.task = j["task"].get<std::string>();
  for (const auto& step : j["steps"]) {
    if (!step.is_string()) throw Error("task sample steps must be strings");
    s.reference_plan.push_back(step.get<std::string>());
  }
  s.domain = j.value("domain", std::string("robothow"));
  return s;
}

std::string slugify(std::string_view text) {
  std::string out;
  for (const auto& w : word_tokens(text)) {
    if (!out.empty()) out += '-';
    out += w;
  }
  return out.empty() ? "task" : out;
}

DatasetLoad load_task_dataset(std::istream& in, DatasetFormat format, bool strict) {
  DatasetLoad load;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    TaskSample sample;
    try {
      sample = sample_from_line(parse_line(line, line_no), format, line_no);
    } catch (const ParseError& e) {
      if (strict) throw;
      load.issues.push_back({line_no, e.what()});
      continue;
    }
    std::string base = sample.id.empty() ? slugify(sample.task) : sample.id;
    std::string id = base;
    for (int n = 2; ids.contains(id); ++n) id = base + "-" + std::to_string(n);
    ids.insert(id);
    sample.id = std::move(id);
    load.samples.push_back(std::move(sample));
  }
  return load;
}

DatasetLoad load_task_dataset(const std::filesystem::path& path, DatasetFormat format, bool strict) {
  std::ifstream in(path);
  if (!in) throw ConfigError("dataset", "cannot open " + path.string());
  return load_task_dataset(in, format, strict);
}

void write_robothow_jsonl(std::ostream& out, const std::vector<TaskSample>& samples) {
  for (const auto& s : samples) out << nlohmann::json{{"id", s.id}, {"task", s.task}, {"steps", s.reference_plan}}.dump() << '\n';
}

}  // namespace nsplan
