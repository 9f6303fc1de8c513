#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nsplan/causal.hpp"
#include "nsplan/errors.hpp"
#include "nsplan/harness.hpp"
#include "nsplan/knowledge_graph.hpp"

using namespace nsplan;

namespace {

enum class Kind { kString, kInt, kReal, kBool, kReals };

struct FlagSpec {
  const char* key;  // RunConfig key; the flag is the key with dashes
  Kind kind;
  const char* help;
};

// Every RunConfig key can be set from the command line.
const std::vector<FlagSpec> kFlags{
    {"dataset", Kind::kString, "Task dataset (jsonl)"},
    {"format", Kind::kString, "robothow-jsonl | wikihow-jsonl | counterfactual-jsonl"},
    {"admissible", Kind::kString, "Admissible step set (json)"},
    {"graph", Kind::kString, "Knowledge graph file"},
    {"graph_format", Kind::kString, "conceptnet-tsv or jsonl"},
    {"language", Kind::kString, "ConceptNet language code"},
    {"rules", Kind::kString, "Verbalization rule overrides (json)"},
    {"generator", Kind::kString, "remote | follower | scripted"},
    {"endpoint", Kind::kString, "Completion endpoint URL"},
    {"model", Kind::kString, "Model name sent to remote services"},
    {"scripted", Kind::kString, "Scripted generator responses (json)"},
    {"schedule", Kind::kReals, "Follower confidence schedule"},
    {"embedding", Kind::kString, "hash | table | remote"},
    {"embedding_dim", Kind::kInt, "Hash embedding dimension"},
    {"embedding_table", Kind::kString, "Embedding table (jsonl)"},
    {"embedding_endpoint", Kind::kString, "Embedding service URL"},
    {"theta", Kind::kReal, "Acceptance threshold"},
    {"max_steps", Kind::kInt, "Step limit per plan"},
    {"hops", Kind::kInt, "Subgraph radius"},
    {"top_k", Kind::kInt, "Concept cap"},
    {"edge_threshold", Kind::kReal, "Adapted weight floor"},
    {"concept_ratio", Kind::kInt, "Concepts per task word"},
    {"cos_keep_threshold", Kind::kReal, "Tail relevance floor"},
    {"fanout_cap", Kind::kInt, "Edges followed per node"},
    {"max_depth", Kind::kInt, "Recursion bound (defaults to hops)"},
    {"mode", Kind::kString, "autoregressive | autoencoder"},
    {"seed", Kind::kInt, "RNG seed"},
    {"jobs", Kind::kInt, "Worker threads"},
    {"out", Kind::kString, "Output directory or file"},
    {"strict", Kind::kBool, "Fail on the first malformed input line"},
};

std::string flag_name(const std::string& key) {
  std::string out = "--" + key;
  for (char& c : out) {
    if (c == '_') c = '-';
  }
  return out;
}

class ConfigFlags {
 public:
  void attach(CLI::App* app) {
    app->add_option("--config", config_path_, "JSON config or run manifest");
    for (const auto& f : kFlags) {
      auto name = flag_name(f.key);
      switch (f.kind) {
        case Kind::kBool: app->add_flag(name, bools_[f.key], f.help); break;
        case Kind::kReals: app->add_option(name, lists_[f.key], f.help)->delimiter(',')->expected(1, -1); break;
        default: app->add_option(name, values_[f.key], f.help); break;
      }
    }
  }

  // Config file first, then every flag that was given.
  RunConfig resolve() const {
    nlohmann::json doc = nlohmann::json::object();
    if (config_path_) {
      doc = RunConfig::read_document(*config_path_);
      if (doc.contains("config") && doc["config"].is_object()) doc = doc["config"];
    }
    for (const auto& f : kFlags) {
      switch (f.kind) {
        case Kind::kBool:
          if (bools_.at(f.key)) doc[f.key] = true;
          break;
        case Kind::kReals:
          if (!lists_.at(f.key).empty()) doc[f.key] = lists_.at(f.key);
          break;
        default: {
          const auto& v = values_.at(f.key);
          if (v) doc[f.key] = convert(f, *v);
        }
      }
    }
    return RunConfig::from_json(doc);
  }

 private:
  static nlohmann::json convert(const FlagSpec& f, const std::string& text) {
    try {
      std::size_t used = 0;
      switch (f.kind) {
        case Kind::kInt: {
          long long v = std::stoll(text, &used);
          if (used != text.size()) break;
          return v;
        }
        case Kind::kReal: {
          double v = std::stod(text, &used);
          if (used != text.size()) break;
          return v;
        }
        default: return text;
      }
    } catch (const std::exception&) {
    }
    throw ConfigError(f.key, "cannot parse '" + text + "'");
  }

  std::optional<std::string> config_path_;
  std::map<std::string, std::optional<std::string>> values_;
  std::map<std::string, bool> bools_;
  std::map<std::string, std::vector<double>> lists_;
};

int cmd_ingest(const std::string& input, const ConfigFlags& flags) {
  auto config = flags.resolve();
  config.graph = input;
  IngestStats stats;
  auto graph = load_graph(config, &stats);
  std::cerr << "lines " << stats.lines << ", kept " << stats.kept << ", dropped (relation) " << stats.dropped_relation
            << ", dropped (language) " << stats.dropped_language << ", malformed " << stats.malformed << "\n";
  for (const auto& issue : stats.issues) std::cerr << "  line " << issue.line << ": " << issue.message << "\n";
  for (const auto& w : stats.warnings) std::cerr << "warning: " << w << "\n";
  if (config.out.empty()) {
    write_jsonl(std::cout, graph);
  } else {
    std::ofstream out(config.out);
    if (!out) throw ConfigError("out", "cannot write " + config.out);
    write_jsonl(out, graph);
  }
  return kExitOk;
}

int cmd_counterfactual(const ConfigFlags& flags, const std::vector<std::string>& kinds,
                       const std::vector<std::string>& locations) {
  auto config = flags.resolve();
  CounterfactualOptions options;
  if (!kinds.empty()) {
    options.kinds.clear();
    for (const auto& k : kinds) options.kinds.push_back(parse_intervention_kind(k));
  }
  options.locations = locations;
  auto samples = run_counterfactual(config, options);
  if (config.out.empty()) {
    write_counterfactual_jsonl(std::cout, samples);
  } else {
    std::ofstream out(config.out);
    if (!out) throw ConfigError("out", "cannot write " + config.out);
    write_counterfactual_jsonl(out, samples);
  }
  std::cerr << samples.size() << " counterfactual samples\n";
  return kExitOk;
}

int cmd_frontdoor(std::size_t trials, const ConfigFlags& flags, std::size_t max_support, bool non_temporal) {
  auto config = flags.resolve();
  RandomScmOptions options;
  options.max_support = max_support;
  options.temporal = !non_temporal;
  auto check = run_frontdoor_trials(trials, config.seed.value_or(0), options);

  auto scm = confounded_example();
  auto joint = observational_joint(scm);
  auto conditional = conditional_s(joint, 1, 0);
  auto truth = surgery_distribution(scm, {1, std::nullopt, std::nullopt});
  auto estimate = frontdoor_estimate(joint, {1, std::nullopt, std::nullopt});

  nlohmann::json report = check.to_json();
  report["confounded_example"] = {{"conditional", conditional}, {"interventional", truth}, {"frontdoor", estimate}};
  std::cout << report.dump(2) << "\n";
  return check.passed() ? kExitOk : kExitTaskFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-guided procedural planner"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  ConfigFlags flags;

  auto* ingest_cmd = app.add_subcommand("ingest", "Filter a ConceptNet dump into the jsonl graph format");
  std::string ingest_input;
  ingest_cmd->add_option("input", ingest_input, "ConceptNet assertions or jsonl graph")->required();
  flags.attach(ingest_cmd);

  auto* plan_cmd = app.add_subcommand("plan", "Plan every task in a dataset");
  flags.attach(plan_cmd);

  auto* cf_cmd = app.add_subcommand("counterfactual", "Write intervened datasets");
  std::vector<std::string> kinds, locations;
  cf_cmd->add_option("--kinds", kinds, "initial, intermediate, final")->delimiter(',');
  cf_cmd->add_option("--locations", locations, "Locations for initial-configuration samples")->delimiter(',');
  flags.attach(cf_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "Score predicted plans against the dataset");
  std::string predictions;
  eval_cmd->add_option("--predictions", predictions, "Directory of <id>.json plan files")->required();
  flags.attach(eval_cmd);

  auto* fd_cmd = app.add_subcommand("frontdoor-check", "Check the front-door identity on random SCMs");
  std::size_t trials = 500;
  std::size_t max_support = 4;
  bool non_temporal = false;
  fd_cmd->add_option("--trials", trials, "Number of random SCMs");
  fd_cmd->add_option("--max-support", max_support, "Largest variable support (<= 4)");
  fd_cmd->add_flag("--non-temporal", non_temporal, "Drop the previous-step variable");
  flags.attach(fd_cmd);

  auto* inspect_cmd = app.add_subcommand("inspect", "Show the knowledge stages for one task");
  std::string task;
  bool as_json = false;
  inspect_cmd->add_option("--task", task, "Task name")->required();
  inspect_cmd->add_flag("--json", as_json, "Print JSON instead of text");
  flags.attach(inspect_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest_cmd->parsed()) return cmd_ingest(ingest_input, flags);
    if (plan_cmd->parsed()) return run_plan(flags.resolve(), std::cerr);
    if (cf_cmd->parsed()) return cmd_counterfactual(flags, kinds, locations);
    if (eval_cmd->parsed()) {
      auto report = run_eval(flags.resolve(), predictions, std::cerr);
      std::cout << report.to_text();
      return kExitOk;
    }
    if (fd_cmd->parsed()) return cmd_frontdoor(trials, flags, max_support, non_temporal);
    if (inspect_cmd->parsed()) {
      auto inspection = run_inspect(flags.resolve(), task);
      if (as_json) {
        std::cout << inspection.to_json().dump(2) << "\n";
      } else {
        std::cout << inspection.to_text();
      }
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTaskFailed;
  }
  return kExitOk;
}
