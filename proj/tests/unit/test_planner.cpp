#include <gtest/gtest.h>

#include "mirage/planner/planner.hpp"
#include "../support/helpers.hpp"

using namespace mirage;
using namespace mirage::planner;
using mirage::provider::any_prompt;
using mirage::provider::contains;
using mirage::provider::ScriptedProvider;
using nlohmann::json;

namespace {

const Question kQ{"q1", "What is Mercury?", 2};

const std::string kAmbiguous =
    R"({"reasoning": "r", "is_ambiguous": true, "ambiguity_type": "semantic",
        "ambiguous_aspects": ["referent", 3], "clarification_needed": "which Mercury"})";
const std::string kClarified =
    R"({"clarified_query1": "What is the planet Mercury?", "clarified_query2": "What is the element mercury?"})";

}  // namespace

TEST(Analysis, ConsistencyRules) {
  const auto a = analysis_from_json(json::parse(kAmbiguous));
  EXPECT_TRUE(a.is_ambiguous);
  EXPECT_EQ(a.type, AmbiguityType::Semantic);
  EXPECT_EQ(a.aspects, (std::vector<std::string>{"referent"}));
  EXPECT_EQ(a.clarification_needed, "which Mercury");

  const auto none = analysis_from_json(json{{"is_ambiguous", "N"}, {"ambiguity_type", "None"}});
  EXPECT_FALSE(none.is_ambiguous);
  EXPECT_FALSE(none.type.has_value());
  EXPECT_EQ(to_json(none)["ambiguity_type"], "none");

  EXPECT_THROW(analysis_from_json(json{{"is_ambiguous", true}, {"ambiguity_type", "none"}}), PlannerFormatError);
  EXPECT_THROW(analysis_from_json(json{{"is_ambiguous", false}, {"ambiguity_type", "general"}}), PlannerFormatError);
  EXPECT_THROW(analysis_from_json(json{{"is_ambiguous", true}, {"ambiguity_type", "lexical"}}), PlannerFormatError);
  EXPECT_THROW(analysis_from_json(json{{"ambiguity_type", "general"}}), PlannerFormatError);
  EXPECT_THROW(analysis_from_json(json::array()), PlannerFormatError);
}

TEST(Planner, AmbiguousQuestionGetsTwoClarifications) {
  auto p = std::make_shared<ScriptedProvider>();
  p->register_script(contains("expert at analyzing query ambiguity"), kAmbiguous);
  p->register_script(contains("two specific, actionable, and faithful"), kClarified);
  Planner planner(testsupport::client(p));
  const auto plan = planner.plan(kQ);
  ASSERT_TRUE(plan.valid());
  ASSERT_EQ(plan.clarified.size(), 2u);
  EXPECT_EQ(plan.clarified[0].text, "What is the planet Mercury?");
  EXPECT_EQ(plan.clarified[1].index, 2);
  EXPECT_EQ(plan.clarified[1].type, AmbiguityType::Semantic);
  EXPECT_EQ(p->call_count(), 2u);
}

TEST(Planner, UnambiguousSkipsClarificationCall) {
  auto p = std::make_shared<ScriptedProvider>();
  p->register_script(any_prompt(), R"({"is_ambiguous": "N", "ambiguity_type": "none"})");
  Planner planner(testsupport::client(p));
  const auto plan = planner.plan(kQ);
  EXPECT_TRUE(plan.valid());
  EXPECT_TRUE(plan.clarified.empty());
  EXPECT_EQ(p->call_count(), 1u);
}

TEST(Planner, RetriesOnceThenSucceeds) {
  auto p = std::make_shared<ScriptedProvider>();
  p->register_sequence(contains("expert at analyzing query ambiguity"), {"garbage", kAmbiguous});
  p->register_sequence(contains("two specific, actionable, and faithful"),
                       {R"({"clarified_query1": "only one"})", kClarified});
  Planner planner(testsupport::client(p));
  std::vector<std::string> warnings;
  const auto plan = planner.plan(kQ, &warnings);
  EXPECT_EQ(plan.clarified.size(), 2u);
  EXPECT_EQ(warnings.size(), 2u);
  EXPECT_EQ(p->call_count(), 4u);
}

TEST(Planner, DegradesToUnambiguousAfterTwoFailures) {
  {
    auto p = std::make_shared<ScriptedProvider>();
    p->register_script(any_prompt(), R"({"is_ambiguous": true, "ambiguity_type": "none"})");
    std::vector<std::string> warnings;
    const auto plan = Planner(testsupport::client(p)).plan(kQ, &warnings);
    EXPECT_FALSE(plan.analysis.is_ambiguous);
    EXPECT_TRUE(plan.clarified.empty());
    EXPECT_EQ(p->call_count(), 2u);
    EXPECT_FALSE(warnings.empty());
  }
  {
    auto p = std::make_shared<ScriptedProvider>();
    p->register_script(contains("expert at analyzing query ambiguity"), kAmbiguous);
    p->register_script(any_prompt(), R"({"clarified_query1": "a", "clarified_query2": "  "})");
    const auto plan = Planner(testsupport::client(p)).plan(kQ);
    EXPECT_TRUE(plan.valid());
    EXPECT_TRUE(plan.clarified.empty());
    EXPECT_EQ(p->call_count(), 3u);
  }
}

TEST(Planner, ProviderErrorsPropagate) {
  auto p = std::make_shared<ScriptedProvider>();  // no rules: ScriptMiss
  EXPECT_THROW(Planner(testsupport::client(p)).plan(kQ), provider::ScriptMiss);
}

TEST(Planner, PromptsCarryQuestionAndAnalysis) {
  auto p = std::make_shared<ScriptedProvider>();
  Planner planner(testsupport::client(p));
  EXPECT_NE(planner.analyze_prompt(kQ).find(kQ.text), std::string::npos);
  const auto a = analysis_from_json(json::parse(kAmbiguous));
  const auto prompt = planner.clarify_prompt(kQ, a);
  EXPECT_NE(prompt.find("which Mercury"), std::string::npos);
  EXPECT_NE(prompt.find(kQ.text), std::string::npos);
}
