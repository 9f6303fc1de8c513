#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "nsplan/counterfactual.hpp"
#include "nsplan/errors.hpp"
#include "support.hpp"

using namespace nsplan;
using nsplan::testing::fixture;

namespace {

const TaskSample& household(const std::string& task) {
  static const auto samples = load_task_dataset(fixture("household_tasks.jsonl"), DatasetFormat::kWikiHowJsonl).samples;
  for (const auto& s : samples) {
    if (s.task == task) return s;
  }
  throw std::runtime_error("no fixture task " + task);
}

}  // namespace

TEST(InitialConfiguration, WatchTvInBedroom) {
  const auto& tv = household("Watch TV");
  auto before = tv;
  auto cf = intervene_initial_configuration(tv, "bedroom");
  EXPECT_EQ(cf.kind, InterventionKind::kInitialConfiguration);
  EXPECT_EQ(cf.modified.task, "Watch TV in bedroom");
  ASSERT_EQ(cf.modified.reference_plan.size(), tv.reference_plan.size() + 1);
  EXPECT_EQ(cf.modified.reference_plan.front(), "Walk to bedroom");
  EXPECT_TRUE(std::equal(tv.reference_plan.begin(), tv.reference_plan.end(),
                         cf.modified.reference_plan.begin() + 1));
  EXPECT_EQ(cf.intervention, "bedroom");
  EXPECT_EQ(tv, before);
  EXPECT_EQ(cf.original, tv);
}

TEST(InitialConfiguration, StructuredPlanGetsStructuredWalk) {
  auto tv = load_task_dataset(fixture("watch_tv.jsonl"), DatasetFormat::kRobotHowJsonl).samples.at(0);
  auto cf = intervene_initial_configuration(tv, "bedroom");
  EXPECT_EQ(cf.modified.reference_plan.front(), "[Walk] <bedroom> (1)");
  EXPECT_EQ(numbered_plan(cf.modified).front(), "Step 1: walk to bedroom");
}

TEST(InitialConfiguration, EmptyPlanAndEmptyLocation) {
  TaskSample s{"x", "Relax", {}, "wikihow"};
  auto cf = intervene_initial_configuration(s, "sofa");
  EXPECT_EQ(cf.modified.reference_plan, std::vector<std::string>{"Walk to sofa"});
  EXPECT_THROW(intervene_initial_configuration(s, ""), ContractError);
}

TEST(IntermediateStep, WorkFindComputer) {
  const auto& work = household("Work");
  bool found = false;
  for (std::uint64_t seed = 0; seed < 200 && !found; ++seed) {
    auto cf = intervene_intermediate_step(work, seed);
    EXPECT_EQ(cf.modified.reference_plan, work.reference_plan);
    if (cf.intervention == "Find computer") {
      EXPECT_EQ(cf.modified.task, "Work (Find Computer)");
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(IntermediateStep, SingleStepAndEmptyPlan) {
  TaskSample s{"x", "Rest", {"Sit on sofa"}, "wikihow"};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(intervene_intermediate_step(s, seed).modified.task, "Rest (Sit On Sofa)");
  }
  s.reference_plan.clear();
  EXPECT_THROW(intervene_intermediate_step(s, 1), ContractError);
}

TEST(IntermediateStep, SeededAndUniform) {
  TaskSample s{"x", "T", {"a", "b", "c", "d"}, "wikihow"};
  EXPECT_EQ(intervene_intermediate_step(s, 99).intervention, intervene_intermediate_step(s, 99).intervention);
  std::map<std::string, int> counts;
  const int draws = 10000;
  for (int seed = 0; seed < draws; ++seed) ++counts[intervene_intermediate_step(s, seed).intervention];
  const double sigma = std::sqrt(draws * 0.25 * 0.75);
  double chi2 = 0;
  for (const auto& step : s.reference_plan) {
    EXPECT_NEAR(counts[step], draws * 0.25, 3 * sigma) << step;
    double d = counts[step] - draws * 0.25;
    chi2 += d * d / (draws * 0.25);
  }
  EXPECT_LT(chi2, 16.27);  // chi-square, 3 degrees of freedom, p = 0.001
}

TEST(FinalGoal, TurnLightOffAndClean) {
  const auto& a = household("Turn light off");
  const auto& b = household("Clean");
  auto cf = intervene_final_goal(a, b);
  EXPECT_EQ(cf.modified.task, "Turn light off and Clean");
  EXPECT_EQ(cf.modified.reference_plan.size(), 12u);
  auto numbered = numbered_plan(cf.modified);
  for (std::size_t i = 0; i < numbered.size(); ++i) {
    EXPECT_EQ(numbered[i].rfind("Step " + std::to_string(i + 1) + ": ", 0), 0u) << numbered[i];
  }
  EXPECT_EQ(numbered[3], "Step 4: Walk to home office");
  ASSERT_TRUE(cf.second);
  EXPECT_EQ(*cf.second, b);
}

TEST(FinalGoal, SelfCompositionAndLengths) {
  const auto& a = household("Watch TV");
  auto self = intervene_final_goal(a, a);
  std::vector<std::string> twice = a.reference_plan;
  twice.insert(twice.end(), a.reference_plan.begin(), a.reference_plan.end());
  EXPECT_EQ(self.modified.reference_plan, twice);
  for (const auto& x : {"Watch TV", "Work", "Turn light off", "Clean"}) {
    for (const auto& y : {"Watch TV", "Work", "Turn light off", "Clean"}) {
      EXPECT_EQ(intervene_final_goal(household(x), household(y)).modified.reference_plan.size(),
                household(x).reference_plan.size() + household(y).reference_plan.size());
    }
  }
  TaskSample empty{"e", "E", {}, "wikihow"};
  EXPECT_THROW(intervene_final_goal(a, empty), ContractError);
}

TEST(Counterfactual, JsonlRoundTripsThroughLoader) {
  std::vector<CounterfactualSample> out{intervene_initial_configuration(household("Watch TV"), "bedroom"),
                                        intervene_final_goal(household("Turn light off"), household("Clean"))};
  std::stringstream ss;
  write_counterfactual_jsonl(ss, out);
  auto back = load_task_dataset(ss, DatasetFormat::kCounterfactualJsonl);
  ASSERT_EQ(back.samples.size(), 2u);
  EXPECT_EQ(back.samples[0].task, "Watch TV in bedroom");
  EXPECT_EQ(back.samples[1].reference_plan.size(), 12u);
  EXPECT_EQ(title_case("find computer"), "Find Computer");
}
