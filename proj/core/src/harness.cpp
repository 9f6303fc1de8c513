#include "nsplan/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <map>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "nsplan/errors.hpp"
#include "nsplan/text.hpp"

namespace nsplan {

namespace fs = std::filesystem;

namespace {

GeneratorKind parse_generator_kind(const std::string& name) {
  if (name == "remote") return GeneratorKind::kRemote;
  if (name == "follower") return GeneratorKind::kFollower;
  if (name == "scripted") return GeneratorKind::kScripted;
  throw ConfigError("generator", "expected remote, follower or scripted, got '" + name + "'");
}

EmbeddingKind parse_embedding_kind(const std::string& name) {
  if (name == "hash") return EmbeddingKind::kHash;
  if (name == "table") return EmbeddingKind::kTable;
  if (name == "remote") return EmbeddingKind::kRemote;
  throw ConfigError("embedding", "expected hash, table or remote, got '" + name + "'");
}

GenerationMode parse_mode(const std::string& name) {
  if (name == "ar" || name == "autoregressive") return GenerationMode::kAutoregressive;
  if (name == "ae" || name == "autoencoder") return GenerationMode::kAutoencoder;
  throw ConfigError("mode", "expected autoregressive or autoencoder, got '" + name + "'");
}

std::string_view graph_format_name(GraphFormat f) { return f == GraphFormat::kJsonl ? "jsonl" : "conceptnet-tsv"; }

template <typename T>
T get_field(const nlohmann::json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(key, "has the wrong type");
  }
}

void require_file(const std::string& path, const char* field) {
  if (path.empty()) throw ConfigError(field, "is required");
  if (!fs::is_regular_file(path)) throw ConfigError(field, "file not found: " + path);
}

void validate_for_plan(const RunConfig& c) {
  c.planner.validate();
  require_file(c.dataset, "dataset");
  require_file(c.admissible, "admissible");
  if (!c.graph.empty()) require_file(c.graph, "graph");
  if (!c.rules.empty()) require_file(c.rules, "rules");
  if (c.out.empty()) throw ConfigError("out", "is required");
  if (c.jobs < 1) throw ConfigError("jobs", "must be >= 1");
  switch (c.generator) {
    case GeneratorKind::kScripted: require_file(c.scripted, "scripted"); break;
    case GeneratorKind::kRemote:
      if (c.endpoint.empty()) throw ConfigError("endpoint", "is required for the remote generator");
      break;
    case GeneratorKind::kFollower: break;
  }
  switch (c.embedding) {
    case EmbeddingKind::kTable: require_file(c.embedding_table, "embedding_table"); break;
    case EmbeddingKind::kRemote:
      if (c.embedding_endpoint.empty()) throw ConfigError("embedding_endpoint", "is required for remote embeddings");
      break;
    case EmbeddingKind::kHash:
      if (c.embedding_dim == 0) throw ConfigError("embedding_dim", "must be positive");
      break;
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

std::string iso_now() {
  auto now = std::chrono::system_clock::now();
  auto t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Pipeline {
  KnowledgeGraph graph;
  AdmissibleSet admissible;
  RuleSet rules;
  std::unique_ptr<EmbeddingProvider> embedder;
  std::unique_ptr<Generator> generator;
};

Pipeline load_pipeline(const RunConfig& c, bool with_generator) {
  Pipeline p;
  p.graph = load_graph(c);
  p.admissible = AdmissibleSet::load(c.admissible);
  p.rules = c.rules.empty() ? RuleSet::defaults() : RuleSet::load(c.rules);
  p.embedder = make_embedder(c);
  if (with_generator) p.generator = make_generator(c);
  p.admissible.warm(*p.embedder);
  return p;
}

}  // namespace

std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kRemote: return "remote";
    case GeneratorKind::kFollower: return "follower";
    case GeneratorKind::kScripted: return "scripted";
  }
  return "follower";
}

std::string_view to_string(EmbeddingKind kind) {
  switch (kind) {
    case EmbeddingKind::kHash: return "hash";
    case EmbeddingKind::kTable: return "table";
    case EmbeddingKind::kRemote: return "remote";
  }
  return "hash";
}

nlohmann::json RunConfig::to_json() const {
  const auto& p = planner;
  return {
      {"theta", p.theta},
      {"max_steps", p.max_steps},
      {"hops", p.hops},
      {"concept_ratio", p.concept_ratio},
      {"cos_keep_threshold", p.cos_keep_threshold},
      {"edge_threshold", p.edge_threshold},
      {"top_k", p.top_k},
      {"fanout_cap", p.fanout_cap},
      {"max_depth", p.max_depth ? nlohmann::json(*p.max_depth) : nlohmann::json()},
      {"mode", p.mode == GenerationMode::kAutoencoder ? "autoencoder" : "autoregressive"},
      {"generator", to_string(generator)},
      {"endpoint", endpoint},
      {"model", model},
      {"scripted", scripted},
      {"schedule", schedule},
      {"embedding", to_string(embedding)},
      {"embedding_dim", embedding_dim},
      {"embedding_table", embedding_table},
      {"embedding_endpoint", embedding_endpoint},
      {"graph", graph},
      {"graph_format", graph_format_name(graph_format)},
      {"language", language},
      {"dataset", dataset},
      {"format", to_string(format)},
      {"admissible", admissible},
      {"rules", rules},
      {"out", out},
      {"seed", seed ? nlohmann::json(*seed) : nlohmann::json()},
      {"jobs", jobs},
      {"strict", strict},
  };
}

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
  const nlohmann::json& j = doc.contains("config") && doc["config"].is_object() ? doc["config"] : doc;
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  RunConfig c;
  auto& p = c.planner;
  for (const auto& [key, value] : j.items()) {
    if (value.is_null()) continue;
    if (key == "theta") p.theta = get_field<double>(j, key);
    else if (key == "max_steps") p.max_steps = get_field<int>(j, key);
    else if (key == "hops") p.hops = get_field<int>(j, key);
    else if (key == "concept_ratio") p.concept_ratio = get_field<std::size_t>(j, key);
    else if (key == "cos_keep_threshold") p.cos_keep_threshold = get_field<double>(j, key);
    else if (key == "edge_threshold") p.edge_threshold = get_field<double>(j, key);
    else if (key == "top_k") p.top_k = get_field<std::size_t>(j, key);
    else if (key == "fanout_cap") p.fanout_cap = get_field<std::size_t>(j, key);
    else if (key == "max_depth") p.max_depth = get_field<int>(j, key);
    else if (key == "mode") p.mode = parse_mode(get_field<std::string>(j, key));
    else if (key == "generator") c.generator = parse_generator_kind(get_field<std::string>(j, key));
    else if (key == "endpoint") c.endpoint = get_field<std::string>(j, key);
    else if (key == "model") c.model = get_field<std::string>(j, key);
    else if (key == "scripted") c.scripted = get_field<std::string>(j, key);
    else if (key == "schedule") c.schedule = get_field<std::vector<double>>(j, key);
    else if (key == "embedding") c.embedding = parse_embedding_kind(get_field<std::string>(j, key));
    else if (key == "embedding_dim") c.embedding_dim = get_field<std::size_t>(j, key);
    else if (key == "embedding_table") c.embedding_table = get_field<std::string>(j, key);
    else if (key == "embedding_endpoint") c.embedding_endpoint = get_field<std::string>(j, key);
    else if (key == "graph") c.graph = get_field<std::string>(j, key);
    else if (key == "graph_format") c.graph_format = parse_graph_format(get_field<std::string>(j, key));
    else if (key == "language") c.language = get_field<std::string>(j, key);
    else if (key == "dataset") c.dataset = get_field<std::string>(j, key);
    else if (key == "format") c.format = parse_dataset_format(get_field<std::string>(j, key));
    else if (key == "admissible") c.admissible = get_field<std::string>(j, key);
    else if (key == "rules") c.rules = get_field<std::string>(j, key);
    else if (key == "out") c.out = get_field<std::string>(j, key);
    else if (key == "seed") c.seed = get_field<std::uint64_t>(j, key);
    else if (key == "jobs") c.jobs = get_field<std::size_t>(j, key);
    else if (key == "strict") c.strict = get_field<bool>(j, key);
    else throw ConfigError(key, "unknown configuration key");
  }
  return c;
}

nlohmann::json RunConfig::read_document(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
}

std::unique_ptr<EmbeddingProvider> make_embedder(const RunConfig& c) {
  switch (c.embedding) {
    case EmbeddingKind::kHash:
      return std::make_unique<HashEmbedding>(HashEmbeddingOptions{c.embedding_dim, c.seed.value_or(0), true});
    case EmbeddingKind::kTable:
      return std::make_unique<TableEmbedding>(TableEmbedding::load(c.embedding_table, c.seed.value_or(0)));
    case EmbeddingKind::kRemote: {
      RemoteEmbeddingOptions o;
      o.http.url = c.embedding_endpoint;
      o.http.api_key = api_key_from_env();
      o.model = c.model;
      return std::make_unique<RemoteEmbedding>(std::move(o));
    }
  }
  throw ConfigError("embedding", "unsupported provider");
}

std::unique_ptr<Generator> make_generator(const RunConfig& c) {
  switch (c.generator) {
    case GeneratorKind::kFollower: return std::make_unique<KnowledgeFollower>(c.schedule);
    case GeneratorKind::kScripted: return std::make_unique<ScriptedGenerator>(ScriptedGenerator::load(c.scripted));
    case GeneratorKind::kRemote: {
      RemoteGeneratorOptions o;
      o.http.url = c.endpoint;
      o.http.api_key = api_key_from_env();
      o.model = c.model;
      return std::make_unique<RemoteGenerator>(std::move(o));
    }
  }
  throw ConfigError("generator", "unsupported provider");
}

KnowledgeGraph load_graph(const RunConfig& c, IngestStats* stats) {
  if (c.graph.empty()) return {};
  std::ifstream in(c.graph);
  if (!in) throw ConfigError("graph", "cannot open " + c.graph);
  IngestOptions options;
  options.format = c.graph_format;
  options.language = c.language;
  options.strict = c.strict;
  auto result = ingest(in, options);
  if (stats != nullptr) *stats = std::move(result.stats);
  return std::move(result.graph);
}

int run_plan(const RunConfig& config, std::ostream& log) {
  const auto started = std::chrono::steady_clock::now();
  Pipeline pipeline;
  std::vector<TaskSample> tasks;
  try {
    validate_for_plan(config);
    pipeline = load_pipeline(config, true);
    auto load = load_task_dataset(config.dataset, config.format, config.strict);
    for (const auto& issue : load.issues) log << "dataset line " << issue.line << ": " << issue.message << '\n';
    tasks = std::move(load.samples);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  fs::create_directories(config.out);

  struct Outcome {
    std::string status = "ok";
    std::string error;
    std::size_t steps = 0;
    std::string termination;
  };
  std::vector<Outcome> outcomes(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const auto& sample = tasks[i];
      PlanResult result;
      auto& outcome = outcomes[i];
      try {
        result = plan(sample.task, pipeline.graph, pipeline.admissible, *pipeline.generator, *pipeline.embedder,
                      config.planner, pipeline.rules);
      } catch (const PlanAborted& e) {
        result = e.partial();
        outcome.status = "failed";
        outcome.error = e.what();
      } catch (const Error& e) {
        result.task = sample.task;
        outcome.status = "failed";
        outcome.error = e.what();
      }
      outcome.steps = result.steps.size();
      outcome.termination = result.termination ? std::string(to_string(*result.termination)) : "";
      auto j = result.to_json();
      j["id"] = sample.id;
      if (!outcome.error.empty()) j["error"] = outcome.error;
      write_file(fs::path(config.out) / (sample.id + ".json"), j.dump(2) + "\n");
      std::lock_guard lock(log_mutex);
      log << sample.id << ": " << outcome.status << ", " << outcome.steps << " steps";
      if (!outcome.termination.empty()) log << ", " << outcome.termination;
      if (!outcome.error.empty()) log << " (" << outcome.error << ")";
      log << '\n';
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k + 1 < std::min(config.jobs, std::max<std::size_t>(tasks.size(), 1)); ++k) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& t : pool) t.join();

  bool failed = false;
  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config.to_json();
  manifest["tasks"] = nlohmann::json::array();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& o = outcomes[i];
    nlohmann::json entry{{"id", tasks[i].id},
                         {"task", tasks[i].task},
                         {"status", o.status},
                         {"steps", o.steps},
                         {"termination", o.termination.empty() ? nlohmann::json() : nlohmann::json(o.termination)}};
    if (!o.error.empty()) entry["error"] = o.error;
    failed = failed || o.status != "ok";
    manifest["tasks"].push_back(std::move(entry));
  }
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
  manifest["timing"] = {{"finished_at", iso_now()}, {"elapsed_ms", elapsed.count()}};
  write_file(fs::path(config.out) / "manifest.json", manifest.dump(2) + "\n");
  return failed ? kExitTaskFailed : kExitOk;
}

MetricReport run_eval(const RunConfig& config, const fs::path& predictions, std::ostream& log) {
  if (config.dataset.empty()) throw ConfigError("dataset", "is required");
  if (!fs::is_directory(predictions)) throw ConfigError("predictions", "not a directory: " + predictions.string());

  std::map<std::string, std::vector<std::string>> predicted;
  for (const auto& entry : fs::directory_iterator(predictions)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    if (entry.path().filename() == "manifest.json" || entry.path().filename() == "metrics.json") continue;
    std::ifstream in(entry.path());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error("cannot parse prediction " + entry.path().string() + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("steps") || !j["steps"].is_array()) {
      throw Error("prediction " + entry.path().string() + " has no \"steps\" array");
    }
    std::string id = j.value("id", entry.path().stem().string());
    std::vector<std::string> steps;
    for (const auto& s : j["steps"]) {
      if (s.is_string()) steps.push_back(s.get<std::string>());
      else if (s.is_object() && s.contains("text") && s["text"].is_string()) steps.push_back(s["text"].get<std::string>());
      else throw Error("prediction " + id + " has a malformed step");
    }
    predicted[id] = std::move(steps);
  }
  if (predicted.empty()) throw Error("no predictions found in " + predictions.string());

  auto references = load_task_dataset(config.dataset, config.format, config.strict).samples;
  std::set<std::string> ref_ids;
  std::vector<std::string> unmatched;
  for (const auto& r : references) {
    ref_ids.insert(r.id);
    if (!predicted.contains(r.id)) unmatched.push_back("missing prediction: " + r.id);
  }
  for (const auto& [id, steps] : predicted) {
    if (!ref_ids.contains(id)) unmatched.push_back("no reference: " + id);
  }
  if (!unmatched.empty()) {
    std::string msg = "prediction and reference ids do not match:";
    for (const auto& u : unmatched) msg += "\n  " + u;
    throw Error(msg);
  }

  auto embedder = make_embedder(config);
  std::vector<SampleMetrics> samples;
  for (const auto& r : references) {
    std::vector<std::string> ref_steps;
    for (const auto& line : r.reference_plan) ref_steps.push_back(natural_text(line));
    samples.push_back(evaluate_plans(r.id, predicted.at(r.id), ref_steps, *embedder));
  }
  auto report = MetricReport::from_samples(std::move(samples));
  if (!config.out.empty()) {
    fs::create_directories(config.out);
    write_file(fs::path(config.out) / "metrics.json", report.to_json().dump(2) + "\n");
    write_file(fs::path(config.out) / "metrics.txt", report.to_text());
    log << "wrote " << (fs::path(config.out) / "metrics.json").string() << '\n';
  }
  return report;
}

std::string Inspection::to_text() const {
  std::ostringstream out;
  out << "task: " << task << "\n\n[entities]\n";
  for (const auto& e : stages.entities.entities) out << "  " << e.key << " (" << to_string(e.kind) << ")\n";
  out << "\n[subgraph] " << stages.sampled.triplets.size() << " sampled, " << stages.selected.triplets.size()
      << " selected\n";
  for (const auto& t : stages.selected.triplets) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f (w %.2f, hop %d)", t.adapted_weight, t.triplet.weight, t.hop);
    out << "  " << t.triplet.head << " " << t.triplet.relation.name() << " " << t.triplet.tail << "  " << buf << '\n';
  }
  out << "\n[knowledge prompt]\n";
  for (const auto& line : stages.knowledge.rendered()) out << "  " << line << '\n';
  out << "\n[admissible knowledge prompt]\n";
  for (const auto& line : stages.translated.prompt.rendered()) out << "  " << line << '\n';
  out << "\n[aggregated prompt]\n" << prompt.rendered;
  return out.str();
}

nlohmann::json Inspection::to_json() const {
  nlohmann::json entities = nlohmann::json::array();
  for (const auto& e : stages.entities.entities) {
    entities.push_back({{"surface", e.surface}, {"key", e.key}, {"kind", to_string(e.kind)}});
  }
  nlohmann::json selected = nlohmann::json::array();
  for (const auto& t : stages.selected.triplets) {
    selected.push_back({{"head", t.triplet.head},
                        {"relation", t.triplet.relation.name()},
                        {"tail", t.triplet.tail},
                        {"weight", t.triplet.weight},
                        {"adapted_weight", t.adapted_weight},
                        {"hop", t.hop}});
  }
  return {{"task", task},
          {"entities", entities},
          {"sampled", stages.sampled.triplets.size()},
          {"selected", selected},
          {"knowledge", stages.knowledge.lines},
          {"admissible_knowledge", stages.translated.prompt.lines},
          {"prompt", prompt.rendered}};
}

Inspection run_inspect(const RunConfig& config, const std::string& task) {
  config.planner.validate();
  require_file(config.admissible, "admissible");
  if (!config.graph.empty()) require_file(config.graph, "graph");
  auto pipeline = load_pipeline(config, false);
  Inspection view;
  view.task = task;
  view.stages = build_knowledge_stages(task, pipeline.graph, pipeline.admissible, *pipeline.embedder, config.planner,
                                       pipeline.rules);
  view.prompt = aggregate_prompt(task, {}, view.stages.translated.prompt.lines);
  return view;
}

InterventionKind parse_intervention_kind(std::string_view name) {
  if (name == "initial" || name == "InitialConfiguration") return InterventionKind::kInitialConfiguration;
  if (name == "intermediate" || name == "IntermediateStep") return InterventionKind::kIntermediateStep;
  if (name == "final" || name == "FinalGoal") return InterventionKind::kFinalGoal;
  throw ConfigError("kind", "expected initial, intermediate or final, got '" + std::string(name) + "'");
}

std::vector<CounterfactualSample> run_counterfactual(const RunConfig& config, const CounterfactualOptions& options) {
  if (!config.seed) throw ConfigError("seed", "is required for counterfactual construction");
  require_file(config.dataset, "dataset");
  auto tasks = load_task_dataset(config.dataset, config.format, config.strict).samples;

  std::vector<std::string> locations = options.locations;
  if (locations.empty() && !config.admissible.empty()) {
    std::set<std::string> objects;
    for (const auto& s : AdmissibleSet::load(config.admissible).steps()) {
      if (s.structured) objects.insert(s.structured->object);
    }
    locations.assign(objects.begin(), objects.end());
  }

  std::mt19937_64 rng(*config.seed);
  std::vector<CounterfactualSample> out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& task = tasks[i];
    for (auto kind : options.kinds) {
      switch (kind) {
        case InterventionKind::kInitialConfiguration: {
          if (locations.empty()) {
            throw ConfigError("locations", "initial-configuration needs --location or an admissible object set");
          }
          std::uniform_int_distribution<std::size_t> pick(0, locations.size() - 1);
          out.push_back(intervene_initial_configuration(task, locations[pick(rng)]));
          break;
        }
        case InterventionKind::kIntermediateStep:
          if (task.reference_plan.empty()) break;
          out.push_back(intervene_intermediate_step(task, rng()));
          break;
        case InterventionKind::kFinalGoal: {
          if (tasks.size() < 2 || task.reference_plan.empty()) break;
          std::uniform_int_distribution<std::size_t> pick(0, tasks.size() - 2);
          std::size_t j = pick(rng);
          if (j >= i) ++j;
          if (tasks[j].reference_plan.empty()) break;
          out.push_back(intervene_final_goal(task, tasks[j]));
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace nsplan
