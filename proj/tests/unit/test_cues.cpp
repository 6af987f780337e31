#include <gtest/gtest.h>

#include <cmath>

#include "mirage/core/errors.hpp"
#include "mirage/cues/cues.hpp"
#include "../support/helpers.hpp"

using namespace mirage;
using namespace mirage::cues;

namespace {

std::vector<std::string> texts(const std::vector<RelaxVariant>& v) {
  std::vector<std::string> out;
  for (const auto& x : v) out.push_back(x.text);
  return out;
}

}  // namespace

TEST(HitIndex, ConjunctiveContainment) {
  testsupport::TopicRetriever t;
  HitIndex idx(*t.corpus);
  EXPECT_EQ(idx.size(), 8u);
  EXPECT_EQ(idx.total_hits("the city"), 1u);
  EXPECT_EQ(idx.total_hits("river"), 1u);
  EXPECT_EQ(idx.total_hits("film director"), 1u);
  EXPECT_EQ(idx.total_hits("film river"), 0u);
  EXPECT_EQ(idx.total_hits("?!"), 8u);
  EXPECT_EQ(total_hits("ship", *t.corpus), 1u);
}

TEST(Kl, HandComputedValue) {
  // P_top = (1/2, 1/2, 0), P_corpus = (1/4, 1/4, 1/2): KL = ln 2.
  const TokenCounts top{{"a", 1}, {"b", 1}};
  const TokenCounts corpus{{"a", 1}, {"b", 1}, {"c", 2}};
  EXPECT_NEAR(kl_divergence(top, corpus, 0.0), std::log(2.0), 1e-12);
  EXPECT_NEAR(kl_divergence(top, corpus), std::log(2.0), 1e-4);
  EXPECT_NEAR(kl_divergence(corpus, corpus, 0.0), 0.0, 1e-12);
}

TEST(Kl, Errors) {
  EXPECT_THROW(kl_divergence(TokenCounts{}, TokenCounts{{"a", 1}}), EmptySnippets);
  EXPECT_THROW(kl_divergence(TokenCounts{{"a", 1}}, TokenCounts{}), PreconditionError);
}

TEST(Kl, NonNegativeForRetrievedSnippets) {
  testsupport::TopicRetriever t;
  HitIndex idx(*t.corpus);
  const double kl = kl_divergence("ship storm", t.retriever, 2, idx);
  EXPECT_GT(kl, 0.0);
  EXPECT_NEAR(kl_divergence("anything", t.retriever, 8, idx), 0.0, 1e-9);
}

TEST(Relax, VariantsRemoveOneConstraintEach) {
  EXPECT_EQ(texts(relax_variants("Who won the election in 1992?")),
            (std::vector<std::string>{"Who won the election?"}));
  EXPECT_EQ(texts(relax_variants("Which team had 25 wins in 2001?")),
            (std::vector<std::string>{"Which team had wins in 2001?", "Which team had 25 wins?"}));
  EXPECT_EQ(texts(relax_variants("Who sang \"Let It Be\" in 1970?")),
            (std::vector<std::string>{"Who sang in 1970?", "Who sang \"Let It Be\"?"}));
  EXPECT_EQ(texts(relax_variants("What happened on 12 July 1998 in Paris?")),
            (std::vector<std::string>{"What happened in Paris?"}));
  EXPECT_EQ(texts(relax_variants("Who ruled during the 1920s?")), (std::vector<std::string>{"Who ruled?"}));
  EXPECT_TRUE(relax_variants("What is the capital of France?").empty());
}

TEST(Relax, ConstraintKinds) {
  const auto v = relax_variants("Who sang \"Help\" on 1965-07-19 in 1965 with 4 members?");
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v[0].removed.kind, Constraint::Kind::Quoted);
  EXPECT_EQ(v[1].removed.kind, Constraint::Kind::Date);
  EXPECT_EQ(v[2].removed.kind, Constraint::Kind::Year);
  EXPECT_EQ(v[3].removed.kind, Constraint::Kind::Number);
  EXPECT_EQ(v[2].removed.text, "1965");
}

TEST(Relax, TidyVariant) {
  EXPECT_EQ(tidy_variant("  Who  won ,, the cup ?"), "Who won, the cup?");
}

TEST(Relax, DeltaRatio) {
  const auto c = retrieval::Corpus::from_vectors(
      {{"a", "", "election won in 1992"}, {"b", "", "election won in 1996"}, {"c", "", "election lost"}},
      {{1, 0}, {0, 1}, {1, 1}});
  HitIndex idx(c);
  // H("election won 1992") = 1, H("election won") = 2.
  EXPECT_DOUBLE_EQ(*relax_delta_ratio("election won in 1992", idx), 2.0);
  EXPECT_FALSE(relax_delta_ratio("election won", idx).has_value());
  EXPECT_FALSE(relax_delta_ratio("election won in 2020", idx).has_value());  // H(q) = 0
}

TEST(Cues, ComputeAndRender) {
  testsupport::TopicRetriever t;
  HitIndex idx(*t.corpus);
  const auto cues = compute_cues("Who won the football final in 1998?", t.retriever, idx, 3);
  EXPECT_EQ(cues.variants.size(), 1u);
  EXPECT_TRUE(cues.kl_divergence.has_value());
  const auto j = to_json(cues);
  EXPECT_TRUE(j.contains("total_hits"));

  const auto with = render_cue_prompt("Q?", cues);
  EXPECT_NE(with.find("Q?"), std::string::npos);
  const auto without = render_cue_prompt("Q?", std::nullopt);
  EXPECT_NE(without.find("n/a"), std::string::npos);
}
