#include <gtest/gtest.h>

#include "mirage/baselines/baselines.hpp"
#include "../support/helpers.hpp"

using namespace mirage;
using namespace mirage::baselines;
using mirage::provider::any_prompt;
using mirage::provider::contains;
using mirage::provider::RecordingProvider;
using mirage::provider::ScriptedProvider;

namespace {

const Question kQ{"q1", "Which football final did France win?", 2};

}  // namespace

TEST(EvidenceLabel, Parsing) {
  EXPECT_EQ(parse_evidence_label("Useful"), EvidenceLabel::Useful);
  EXPECT_EQ(parse_evidence_label("partial_useful"), EvidenceLabel::PartialUseful);
  EXPECT_EQ(parse_evidence_label("Partial-Useful"), EvidenceLabel::PartialUseful);
  EXPECT_EQ(parse_evidence_label("partially useful"), EvidenceLabel::PartialUseful);
  EXPECT_EQ(parse_evidence_label("USELESS"), EvidenceLabel::Useless);
  EXPECT_FALSE(parse_evidence_label("meh").has_value());
}

TEST(NoRetrieval, SingleCallAndNoSearch) {
  testsupport::TopicRetriever t;
  auto p = std::make_shared<ScriptedProvider>();
  p->register_script(contains("Answer the question below accurately and concisely"), "  France.  ");
  const auto rec = answer_no_retrieval(kQ, testsupport::client(p));
  EXPECT_EQ(rec.long_answer, "France.");
  EXPECT_EQ(rec.system, "no_retrieval");
  EXPECT_EQ(p->call_count(), 1u);

  auto empty = std::make_shared<ScriptedProvider>();
  empty->register_script(any_prompt(), "   ");
  EXPECT_THROW(answer_no_retrieval(kQ, testsupport::client(empty)), EmptyAnswer);
}

TEST(NaiveRag, OneRetrievalWithPassagesInPrompt) {
  testsupport::TopicRetriever t;
  retrieval::SpyRetriever spy(t.retriever);
  auto inner = std::make_shared<ScriptedProvider>();
  inner->register_script(contains("Answer the question using the retrieved passages below"), "France");
  auto rec_p = std::make_shared<RecordingProvider>(inner);
  const auto rec = answer_naive_rag(kQ, spy, testsupport::client(rec_p), 2);
  EXPECT_EQ(spy.calls(), 1u);
  EXPECT_EQ(spy.queries()[0], kQ.text);
  EXPECT_EQ(rec.transcript["evidence_ids"].size(), 2u);
  EXPECT_EQ(rec.transcript["evidence_ids"][0], "p6");
  EXPECT_NE(rec_p->calls()[0].prompt.find("[1] Football final"), std::string::npos);
}

TEST(Diva, DiversifyVerifyAdapt) {
  testsupport::TopicRetriever t;
  retrieval::SpyRetriever spy(t.retriever);
  auto p = std::make_shared<ScriptedProvider>();
  p->register_script(contains("concrete, distinct interpretations"),
                     R"({"interpretations": ["football final France", "football final France", "ship captain", "x"]})");
  p->register_script(contains("verifying retrieved evidence"), R"({"label": "useful"})");
  p->register_script(contains("Cover every interpretation listed"), "France won; the captain steered.");
  DivaTrace trace;
  DivaConfig cfg;
  cfg.interpretations = 2;
  cfg.top_k = 2;
  const auto rec = answer_diva(kQ, spy, testsupport::client(p), cfg, PromptLibrary::bundled(), &trace);
  EXPECT_EQ(trace.interpretations, (std::vector<std::string>{"football final France", "ship captain"}));
  EXPECT_EQ(spy.calls(), 2u);
  EXPECT_EQ(trace.label, EvidenceLabel::Useful);
  EXPECT_LE(trace.pool.size(), 4u);
  std::set<std::string> ids;
  for (const auto& e : trace.pool) EXPECT_TRUE(ids.insert(e.passage.doc_id).second);
  EXPECT_NE(trace.final_prompt.find("ship captain"), std::string::npos);
  EXPECT_EQ(rec.long_answer, "France won; the captain steered.");
  EXPECT_EQ(rec.transcript["label"], "useful");
  EXPECT_EQ(p->call_count(), 3u);
}

TEST(Diva, FallbacksWhenRepliesAreUnreadable) {
  testsupport::TopicRetriever t;
  retrieval::SpyRetriever spy(t.retriever);
  auto p = std::make_shared<ScriptedProvider>();
  p->register_script(contains("Cover every interpretation listed"), "fallback answer");
  p->register_script(any_prompt(), "no json at all");
  DivaTrace trace;
  const auto rec = answer_diva(kQ, spy, testsupport::client(p), {}, PromptLibrary::bundled(), &trace);
  EXPECT_EQ(trace.interpretations, (std::vector<std::string>{kQ.text}));
  EXPECT_EQ(trace.label, EvidenceLabel::PartialUseful);
  EXPECT_EQ(trace.warnings.size(), 2u);
  EXPECT_EQ(spy.calls(), 1u);
  EXPECT_EQ(rec.long_answer, "fallback answer");
}

TEST(Diva, UselessEvidenceDropsPassages) {
  testsupport::TopicRetriever t;
  auto p = std::make_shared<ScriptedProvider>();
  p->register_script(contains("concrete, distinct interpretations"), R"({"interpretations": ["river"]})");
  p->register_script(contains("verifying retrieved evidence"), R"({"label": "useless"})");
  p->register_script(any_prompt(), "from memory");
  DivaTrace trace;
  answer_diva(kQ, t.retriever, testsupport::client(p), {}, PromptLibrary::bundled(), &trace);
  EXPECT_EQ(trace.label, EvidenceLabel::Useless);
  EXPECT_EQ(trace.final_prompt.find("A river delta forms"), std::string::npos);
}
