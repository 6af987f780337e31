#include <gtest/gtest.h>

#include "mirage/actor/actor.hpp"
#include "mirage/planner/planner.hpp"
#include "../support/helpers.hpp"

using namespace mirage;
using namespace mirage::actor;
using mirage::provider::any_prompt;
using mirage::provider::contains;
using mirage::provider::ScriptedProvider;

namespace {

const Question kQ{"q1", "Who won the final?", 2};

planner::Plan empty_plan() { return {kQ, planner::unambiguous_analysis(""), {}}; }

std::string search(const std::string& q) { return "THOUGHT: look\nACTION: SEARCH[" + q + "]"; }
std::string answer(const std::string& a) { return "THOUGHT: done\nACTION: ANSWER[" + a + "]"; }

}  // namespace

TEST(ParseAction, LineAndPayloadFormats) {
  const auto a = parse_action("THOUGHT: need facts\nACTION: SEARCH[football final]");
  EXPECT_EQ(a.thought, "need facts");
  EXPECT_EQ(a.action.kind, AgentAction::Kind::Search);
  EXPECT_EQ(a.action.argument, "football final");

  EXPECT_EQ(parse_action("ACTION: ANSWER[planning]").action.kind, AgentAction::Kind::Planning);
  EXPECT_EQ(parse_action("ACTION: PLANNING[]").action.kind, AgentAction::Kind::Planning);
  const auto ans = parse_action("THOUGHT: ok\nACTION: ANSWER[France, 3-0 [final]]");
  EXPECT_EQ(ans.action.kind, AgentAction::Kind::Answer);
  EXPECT_EQ(ans.action.argument, "France, 3-0 [final]");

  const auto p = parse_action(R"({"thought": "t", "action": "search", "argument": "x"})");
  EXPECT_EQ(p.action.kind, AgentAction::Kind::Search);
  EXPECT_EQ(p.action.argument, "x");

  EXPECT_THROW(parse_action("I will just think about it."), ActionParseError);
  EXPECT_THROW(parse_action("ACTION: DANCE[now]"), ActionParseError);
}

TEST(Episode, SearchThenAnswer) {
  testsupport::TopicRetriever t;
  retrieval::SpyRetriever spy(t.retriever);
  auto p = std::make_shared<ScriptedProvider>();
  p->register_sequence(contains("following ReAct"), {search("football final"), answer("France")});
  const auto agent = testsupport::client(p);
  const EpisodeContext ctx{spy, agent};
  const auto r = run_episode(kQ, empty_plan(), ctx);
  EXPECT_EQ(r.final_answer, "France");
  EXPECT_EQ(r.transcript.searches_used, 1);
  EXPECT_EQ(r.transcript.iterations_used, 2);
  EXPECT_EQ(spy.calls(), 1u);
  EXPECT_NE(r.transcript.steps[0].observation.find("[Football final]"), std::string::npos);
  EXPECT_TRUE(transcript_violations(r.transcript, 5, 5).empty());
}

TEST(Episode, DuplicateSearchIsRejectedLocally) {
  testsupport::TopicRetriever t;
  retrieval::SpyRetriever spy(t.retriever);
  auto p = std::make_shared<ScriptedProvider>();
  p->register_sequence(any_prompt(), {search("river"), search(" river "), answer("delta")});
  const auto agent = testsupport::client(p);
  const EpisodeContext ctx{spy, agent};
  const auto r = run_episode(kQ, empty_plan(), ctx);
  EXPECT_EQ(spy.calls(), 1u);
  EXPECT_EQ(r.transcript.searches_used, 1);
  EXPECT_FALSE(r.transcript.steps[1].executed);
  EXPECT_TRUE(transcript_violations(r.transcript, 5, 5).empty());
}

TEST(Episode, BudgetForcesAnswer) {
  testsupport::TopicRetriever t;
  retrieval::SpyRetriever spy(t.retriever);
  auto p = std::make_shared<ScriptedProvider>();
  p->register_script(contains("You must answer now"), answer("forced answer"));
  p->register_sequence(any_prompt(), {search("a"), search("b"), search("c"), search("d")});
  const auto agent = testsupport::client(p);
  EpisodeContext ctx{spy, agent};
  ctx.cfg.max_iterations = 4;
  ctx.cfg.max_searches = 2;
  const auto r = run_episode(kQ, empty_plan(), ctx);
  EXPECT_EQ(r.final_answer, "forced answer");
  EXPECT_EQ(r.transcript.searches_used, 2);
  EXPECT_EQ(r.transcript.iterations_used, 4);
  EXPECT_EQ(spy.calls(), 2u);
  EXPECT_TRUE(r.transcript.steps.back().forced);
  EXPECT_FALSE(r.transcript.steps[2].executed);  // over the search budget
  EXPECT_TRUE(transcript_violations(r.transcript, 4, 2).empty());
}

TEST(Episode, UnparseableForcedStepIsSynthesized) {
  testsupport::TopicRetriever t;
  auto p = std::make_shared<ScriptedProvider>();
  p->register_script(contains("Respond with the answer text only"), "  synthesized  ");
  p->register_script(any_prompt(), "rambling without an action");
  const auto agent = testsupport::client(p);
  EpisodeContext ctx{t.retriever, agent};
  ctx.cfg.max_iterations = 2;
  const auto r = run_episode(kQ, empty_plan(), ctx);
  EXPECT_EQ(r.final_answer, "synthesized");
  EXPECT_EQ(r.transcript.parse_failures, 3);  // two iterations plus the forced step
  EXPECT_EQ(r.transcript.iterations_used, 2);
  EXPECT_TRUE(transcript_violations(r.transcript, 2, 5).empty());
}

TEST(Episode, PlanningAddsClarifiedQuestions) {
  testsupport::TopicRetriever t;
  auto plan_model = std::make_shared<ScriptedProvider>();
  plan_model->register_script(contains("expert at analyzing query ambiguity"),
                              R"({"is_ambiguous": true, "ambiguity_type": "semantic"})");
  plan_model->register_script(contains("two specific, actionable, and faithful"),
                              R"({"clarified_query1": "Men's final?", "clarified_query2": "Women's final?"})");
  planner::Planner planner(testsupport::client(plan_model, "planner"));

  auto p = std::make_shared<ScriptedProvider>();
  p->register_sequence(any_prompt(), {"ACTION: ANSWER[planning]", answer("both")});
  auto rec = std::make_shared<provider::RecordingProvider>(p);
  const auto agent = testsupport::client(rec);
  EpisodeContext ctx{t.retriever, agent, &planner};
  const auto r = run_episode(kQ, empty_plan(), ctx);
  EXPECT_EQ(r.transcript.steps[0].action.kind, AgentAction::Kind::Planning);
  EXPECT_EQ(r.transcript.searches_used, 0);
  EXPECT_EQ(r.transcript.iterations_used, 2);
  EXPECT_NE(r.transcript.steps[0].observation.find("Women's final?"), std::string::npos);
  // The second prompt shows the new clarified questions in the task.
  EXPECT_NE(rec->calls()[1].prompt.find("(2) Women's final?"), std::string::npos);

  auto p2 = std::make_shared<ScriptedProvider>();
  p2->register_sequence(any_prompt(), {"ACTION: ANSWER[planning]", answer("both")});
  const auto agent2 = testsupport::client(p2);
  EpisodeContext disabled{t.retriever, agent2, &planner, PlanningMode::Disabled};
  const auto off = run_episode(kQ, empty_plan(), disabled);
  EXPECT_EQ(off.transcript.steps[0].observation, "planning unavailable");
}

TEST(Violations, DetectsBadTranscripts) {
  AgentTranscript t;
  EXPECT_FALSE(transcript_violations(t, 5, 5).empty());
  t.steps.push_back({1, "", {AgentAction::Kind::Search, "x"}, "", true, false});
  t.steps.push_back({2, "", {AgentAction::Kind::Search, "x"}, "", true, false});
  t.searches_used = 2;
  t.iterations_used = 6;
  const auto v = transcript_violations(t, 5, 1);
  // iterations, searches, no terminal answer, duplicate, empty answer
  EXPECT_EQ(v.size(), 5u);
}

TEST(Clarion, EndToEndAndErrorRecord) {
  testsupport::TopicRetriever t;
  auto plan_model = std::make_shared<ScriptedProvider>();
  plan_model->register_script(any_prompt(), R"({"is_ambiguous": "N", "ambiguity_type": "none"})");
  planner::Planner planner(testsupport::client(plan_model, "planner"));
  auto p = std::make_shared<ScriptedProvider>();
  p->register_sequence(any_prompt(), {search("football final"), answer("France won.")});
  const auto agent = testsupport::client(p);
  const EpisodeContext ctx{t.retriever, agent, &planner};
  const auto rec = answer_clarion(kQ, ctx);
  EXPECT_TRUE(rec.ok());
  EXPECT_EQ(rec.long_answer, "France won.");
  EXPECT_EQ(rec.system, "clarion");
  EXPECT_EQ(rec.transcript["searches_used"], 1);
  EXPECT_TRUE(rec.transcript.contains("plan"));

  // No rule answers the synthesis prompt, so the episode aborts with ScriptMiss.
  auto only_react = std::make_shared<ScriptedProvider>();
  only_react->register_script(contains("following ReAct"), search("river"));
  const auto bad_agent = testsupport::client(only_react);
  EpisodeContext bad{t.retriever, bad_agent, &planner};
  bad.cfg.max_iterations = 1;
  const auto err = answer_clarion(kQ, bad);
  EXPECT_FALSE(err.ok());
  ASSERT_TRUE(err.error.has_value());
  EXPECT_EQ(err.transcript["searches_used"], 1);
}

TEST(Observation, FormatsTitlesAndTruncates) {
  testsupport::TopicRetriever t;
  const auto hits = t.retriever.retrieve("river delta", 1);
  EXPECT_EQ(format_observation(hits, 7), "[River delta] A river");
  EXPECT_EQ(format_observation({}, 10), "No results.");
}
