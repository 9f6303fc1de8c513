#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nsplan/errors.hpp"
#include "nsplan/harness.hpp"
#include "support.hpp"

using namespace nsplan;
using nsplan::testing::fixture;
using nsplan::testing::read_file;
using nsplan::testing::TempDir;

namespace {

RunConfig shower_config(const TempDir& dir) {
  RunConfig c;
  c.graph = fixture("take_shower_graph.jsonl").string();
  c.dataset = fixture("take_shower_tasks.jsonl").string();
  c.admissible = fixture("take_shower_admissible.json").string();
  c.out = (dir / "out").string();
  return c;
}

}  // namespace

TEST(RunConfig, JsonRoundTripAndUnknownKeys) {
  RunConfig c;
  c.planner.theta = 0.5;
  c.planner.max_depth = 2;
  c.generator = GeneratorKind::kScripted;
  c.schedule = {1, 0.5};
  c.seed = 7;
  auto back = RunConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.planner, c.planner);

  EXPECT_THROW(RunConfig::from_json({{"thetaa", 0.5}}), ConfigError);
  EXPECT_THROW(RunConfig::from_json({{"generator", "gpt"}}), ConfigError);
  EXPECT_EQ(RunConfig::from_json({{"config", {{"top_k", 4}}}}).planner.top_k, 4u);
  EXPECT_EQ(RunConfig::from_json({{"seed", nullptr}}).seed, std::nullopt);
}

TEST(RunPlan, WritesPerTaskFilesAndManifest) {
  TempDir dir;
  auto c = shower_config(dir);
  std::ostringstream log;
  ASSERT_EQ(run_plan(c, log), kExitOk) << log.str();
  auto task_file = std::filesystem::path(c.out) / "take-shower.json";
  ASSERT_TRUE(std::filesystem::exists(task_file));
  auto result = nlohmann::json::parse(read_file(task_file));
  EXPECT_EQ(result["task"], "Take shower");
  EXPECT_FALSE(result["steps"].empty());
  auto manifest = nlohmann::json::parse(read_file(std::filesystem::path(c.out) / "manifest.json"));
  EXPECT_EQ(manifest["version"], kVersion);
  EXPECT_EQ(manifest["tasks"][0]["status"], "ok");
  EXPECT_EQ(RunConfig::from_json(manifest).to_json(), c.to_json());

  auto first = read_file(task_file);
  c.jobs = 3;
  ASSERT_EQ(run_plan(c, log), kExitOk);
  EXPECT_EQ(read_file(task_file), first);
}

TEST(RunPlan, ConfigErrorsWriteNothing) {
  TempDir dir;
  auto c = shower_config(dir);
  c.admissible = (dir / "missing.json").string();
  std::ostringstream log;
  EXPECT_EQ(run_plan(c, log), kExitConfig);
  EXPECT_FALSE(std::filesystem::exists(c.out));
  EXPECT_NE(log.str().find("config error"), std::string::npos);

  c = shower_config(dir);
  c.planner.theta = 3;
  EXPECT_EQ(run_plan(c, log), kExitConfig);
  c = shower_config(dir);
  c.generator = GeneratorKind::kRemote;  // no endpoint
  EXPECT_EQ(run_plan(c, log), kExitConfig);
  EXPECT_FALSE(std::filesystem::exists(c.out));
}

TEST(RunPlan, ScriptMissFailsTheTask) {
  TempDir dir;
  auto c = shower_config(dir);
  c.generator = GeneratorKind::kScripted;
  c.scripted = fixture("watch_tv_scripted.json").string();
  std::ostringstream log;
  EXPECT_EQ(run_plan(c, log), kExitTaskFailed);
  auto manifest = nlohmann::json::parse(read_file(std::filesystem::path(c.out) / "manifest.json"));
  EXPECT_EQ(manifest["tasks"][0]["status"], "failed");
  EXPECT_FALSE(manifest["tasks"][0]["error"].get<std::string>().empty());
}

TEST(RunEval, ScoresPlansAgainstReferences) {
  TempDir dir;
  auto c = shower_config(dir);
  std::ostringstream log;
  ASSERT_EQ(run_plan(c, log), kExitOk);
  auto eval = c;
  eval.out = (dir / "metrics").string();
  auto report = run_eval(eval, c.out, log);
  EXPECT_EQ(report.count, 1u);
  EXPECT_GE(report.means.rouge1_f1, 0.0);
  EXPECT_LE(report.means.rouge1_f1, 1.0);
  EXPECT_TRUE(std::filesystem::exists(dir / "metrics" / "metrics.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "metrics" / "metrics.txt"));

  std::filesystem::create_directories(dir / "empty");
  EXPECT_THROW(run_eval(eval, dir / "empty", log), Error);
  std::ofstream(dir / "out" / "stranger.json") << R"({"steps": ["a"]})";
  EXPECT_THROW(run_eval(eval, c.out, log), Error);
}

TEST(RunInspect, ShowsEveryStage) {
  TempDir dir;
  auto c = shower_config(dir);
  auto inspection = run_inspect(c, "Take shower");
  auto text = inspection.to_text();
  for (auto section : {"[entities]", "[subgraph]", "[knowledge prompt]", "[admissible knowledge prompt]",
                       "[aggregated prompt]"}) {
    EXPECT_NE(text.find(section), std::string::npos) << section;
  }
  EXPECT_EQ(inspection.prompt.rendered.rfind("Task: Take shower\n", 0), 0u);
}

TEST(RunCounterfactual, OneSamplePerTaskAndKind) {
  TempDir dir;
  RunConfig c;
  c.dataset = fixture("household_tasks.jsonl").string();
  c.format = DatasetFormat::kWikiHowJsonl;
  c.seed = 3;
  CounterfactualOptions o;
  o.locations = {"bedroom", "kitchen"};
  auto samples = run_counterfactual(c, o);
  EXPECT_EQ(samples.size(), 12u);
  auto again = run_counterfactual(c, o);
  for (std::size_t i = 0; i < samples.size(); ++i) EXPECT_EQ(samples[i].to_json(), again[i].to_json());
  c.seed.reset();
  EXPECT_THROW(run_counterfactual(c, o), ConfigError);
  EXPECT_EQ(parse_intervention_kind("intermediate"), InterventionKind::kIntermediateStep);
  EXPECT_THROW(parse_intervention_kind("nope"), ConfigError);
}
