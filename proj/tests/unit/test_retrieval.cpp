#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "mirage/core/errors.hpp"
#include "mirage/retrieval/corpus.hpp"
#include "mirage/retrieval/embedder.hpp"
#include "mirage/retrieval/search.hpp"
#include "../support/helpers.hpp"

using namespace mirage;
using namespace mirage::retrieval;

namespace {

class FailingEmbedder : public Embedder {
 public:
  std::vector<float> embed(std::string_view text) const override {
    if (text.find("poison") != std::string_view::npos) throw std::runtime_error("service down");
    return {1.0f, 0.0f};
  }
};

class RaggedEmbedder : public Embedder {
 public:
  std::vector<float> embed(std::string_view text) const override {
    return std::vector<float>(text.size() % 2 == 0 ? 2 : 3, 1.0f);
  }
};

}  // namespace

TEST(Embedder, HashEmbedderIsDeterministicAndUnitNorm) {
  HashEmbedder e(32);
  const auto a = e.embed("The river delta");
  EXPECT_EQ(a, e.embed("the RIVER, delta!"));
  ASSERT_EQ(a.size(), 32u);
  EXPECT_NEAR(dot(a, a), 1.0, 1e-6);
  EXPECT_GT(dot(a, e.embed("river mouth")), 0.0);
}

TEST(Embedder, NormalizeRejectsZeroVector) {
  const std::vector<float> z(4, 0.0f);
  EXPECT_THROW(l2_normalize(z), PreconditionError);
  const std::vector<float> v{3.0f, 4.0f};
  const auto n = l2_normalize(v);
  EXPECT_FLOAT_EQ(n[0], 0.6f);
  EXPECT_FLOAT_EQ(n[1], 0.8f);
}

TEST(Corpus, IngestErrors) {
  HashEmbedder e;
  EXPECT_THROW(Corpus::ingest({}, e), PreconditionError);
  EXPECT_THROW(Corpus::ingest({{"a", "t", "x"}, {"a", "t", "y"}}, e), PreconditionError);
  try {
    Corpus::ingest({{"ok", "t", "fine"}, {"bad", "t", "poison"}}, FailingEmbedder{});
    FAIL() << "expected EmbedderError";
  } catch (const EmbedderError& err) {
    EXPECT_EQ(err.item_id(), "bad");
  }
  EXPECT_THROW(Corpus::ingest({{"a", "", "x"}, {"b", "", "xy"}}, RaggedEmbedder{}), DimensionMismatch);
}

TEST(Corpus, FindAndVectorsAreNormalized) {
  const auto c = Corpus::from_vectors({{"a", "", ""}, {"b", "", ""}}, {{2, 0}, {1, 1}});
  EXPECT_EQ(c.find("b"), 1u);
  EXPECT_FALSE(c.find("zz").has_value());
  EXPECT_NEAR(dot(c.vector(1), c.vector(1)), 1.0, 1e-6);
}

TEST(Search, OrderAndTies) {
  // Rows 1 and 3 are identical, so they tie and keep index order.
  const auto c = Corpus::from_vectors({{"a", "", ""}, {"b", "", ""}, {"c", "", ""}, {"d", "", ""}},
                                      {{0, 1}, {1, 0}, {-1, 0}, {1, 0}});
  const std::vector<float> q{1, 0};
  const auto r = search(c, q, 3);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].corpus_index, 1u);
  EXPECT_EQ(r[1].corpus_index, 3u);
  EXPECT_EQ(r[2].corpus_index, 0u);
  EXPECT_NEAR(r[0].score, 1.0, 1e-9);
  EXPECT_NEAR(r[2].score, 0.0, 1e-9);
  EXPECT_EQ(search(c, q, 100).size(), 4u);
}

TEST(Search, MatchesBruteForceOnRandomVectors) {
  std::mt19937_64 rng(5);
  std::normal_distribution<float> g;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng() % 40, dim = 1 + rng() % 8;
    std::vector<Passage> ps;
    std::vector<std::vector<float>> vs;
    for (std::size_t i = 0; i < n; ++i) {
      ps.push_back({"d" + std::to_string(i), "", ""});
      std::vector<float> v(dim);
      for (auto& x : v) x = g(rng);
      v[0] += 1e-3f;  // keep clear of zero
      vs.push_back(v);
    }
    const auto c = Corpus::from_vectors(ps, vs);
    std::vector<float> q(dim);
    for (auto& x : q) x = g(rng);
    q[0] += 1e-3f;
    const auto qu = l2_normalize(q);
    const std::size_t k = 1 + rng() % 12;
    std::vector<std::pair<double, std::size_t>> brute;
    for (std::size_t i = 0; i < n; ++i) brute.emplace_back(-std::clamp(dot(c.vector(i), qu), -1.0, 1.0), i);
    std::stable_sort(brute.begin(), brute.end());
    const auto r = search(c, qu, k);
    ASSERT_EQ(r.size(), std::min(k, n));
    for (std::size_t i = 0; i < r.size(); ++i) {
      EXPECT_EQ(r[i].corpus_index, brute[i].second);
      EXPECT_GE(r[i].score, -1.0);
      EXPECT_LE(r[i].score, 1.0);
    }
  }
}

TEST(Search, TextQueryFindsTopicalPassage) {
  testsupport::TopicRetriever t;
  const auto r = t.retriever.retrieve("which ship captain steered through the storm", 3);
  ASSERT_FALSE(r.empty());
  EXPECT_EQ(r[0].passage.doc_id, "p4");
  EXPECT_EQ(r[0].origin, Origin::query());
}

TEST(Rerank, SortsByClarifiedSimilarityStably) {
  testsupport::TopicRetriever t;
  auto pool = t.retriever.retrieve("film", 8);
  const ClarifiedQuestion cq{"q", AmbiguityType::Semantic, "Which chemical element is a liquid metal?", 1};
  const auto r = rerank(cq, pool, *t.embedder);
  ASSERT_EQ(r.size(), pool.size());
  EXPECT_EQ(r[0].passage.doc_id, "p5");
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_GE(r[i - 1].score, r[i].score);
}

TEST(Spy, CountsCallsAndQueries) {
  testsupport::TopicRetriever t;
  SpyRetriever spy(t.retriever);
  spy.retrieve("a", 2);
  spy.retrieve("b", 2);
  EXPECT_EQ(spy.calls(), 2u);
  EXPECT_EQ(spy.queries(), (std::vector<std::string>{"a", "b"}));
}

TEST(VectorFile, RoundTripAndSidecarUse) {
  testsupport::TempDir dir;
  testsupport::TopicRetriever t;
  write_vector_file(dir / "v.bin", *t.corpus);
  const auto vf = read_vector_file(dir / "v.bin");
  EXPECT_EQ(vf.count, t.corpus->size());
  EXPECT_EQ(vf.dim, t.corpus->dim());
  const auto rows = vf.rows();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t d = 0; d < vf.dim; ++d) EXPECT_EQ(rows[i][d], t.corpus->vector(i)[d]);
  }

  {
    std::ofstream out(dir / "p.jsonl");
    for (const auto& p : testsupport::topic_passages()) {
      out << nlohmann::json{{"doc_id", p.doc_id}, {"title", p.title}, {"text", p.text}}.dump() << "\n";
    }
  }
  // A throwing embedder proves the sidecar was used instead of re-embedding.
  const auto c = load_corpus(dir / "p.jsonl", FailingEmbedder{}, dir / "v.bin");
  EXPECT_EQ(c.size(), t.corpus->size());
  EXPECT_EQ(passage_embedding_text({"x", "Title", "Body"}), "Title\nBody");
}
