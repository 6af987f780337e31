#include "mirage/retrieval/search.hpp"

#include <algorithm>
#include <numeric>

#include "mirage/core/errors.hpp"

namespace mirage::retrieval {
namespace {

double clamp_cosine(double s) { return std::clamp(s, -1.0, 1.0); }

std::vector<float> embed_unit(const Embedder& embedder, std::string_view text, std::string_view id,
                              std::size_t expected_dim) {
  std::vector<float> v;
  try {
    v = embedder.embed(text);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw EmbedderError(std::string(id), e.what());
  }
  if (expected_dim != 0 && v.size() != expected_dim) throw DimensionMismatch(expected_dim, v.size());
  try {
    return l2_normalize(v);
  } catch (const PreconditionError& e) {
    throw EmbedderError(std::string(id), e.what());
  }
}

}  // namespace

std::string Origin::to_string() const {
  switch (kind) {
    case Kind::Query: return "query";
    case Kind::SubQuestion: return "sub_question:" + std::to_string(index);
    case Kind::Backfill: return "backfill";
  }
  return "query";
}

std::vector<RankedEvidence> search(const Corpus& corpus, std::span<const float> query_unit, std::size_t k) {
  if (corpus.empty()) throw PreconditionError("search on an empty corpus");
  if (query_unit.size() != corpus.dim()) throw DimensionMismatch(corpus.dim(), query_unit.size());

  const auto n = corpus.size();
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) scores[i] = clamp_cosine(dot(query_unit, corpus.vector(i)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto take = std::min(k, n);
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);

  std::vector<RankedEvidence> out;
  out.reserve(take);
  for (std::size_t r = 0; r < take; ++r) {
    const auto i = order[r];
    out.push_back({corpus.passage(i), scores[i], Origin::query(), i});
  }
  return out;
}

std::vector<RankedEvidence> search(const Corpus& corpus, std::string_view query, std::size_t k,
                                   const Embedder& embedder) {
  if (corpus.empty()) throw PreconditionError("search on an empty corpus");
  const auto q = embed_unit(embedder, query, "<query>", corpus.dim());
  return search(corpus, q, k);
}

std::vector<RankedEvidence> rerank(const ClarifiedQuestion& clarified, std::vector<RankedEvidence> pool,
                                   const Embedder& embedder) {
  if (pool.empty()) throw PreconditionError("rerank needs a non-empty pool");
  const auto q = embed_unit(embedder, clarified.text, "<clarified>", 0);
  for (auto& item : pool) {
    const auto v = embed_unit(embedder, passage_embedding_text(item.passage), item.passage.doc_id, q.size());
    item.score = clamp_cosine(dot(q, v));
  }
  std::stable_sort(pool.begin(), pool.end(),
                   [](const RankedEvidence& a, const RankedEvidence& b) { return a.score > b.score; });
  return pool;
}

std::vector<RankedEvidence> SpyRetriever::retrieve(std::string_view query, std::size_t k) const {
  {
    std::lock_guard lock(mu_);
    queries_.emplace_back(query);
  }
  return inner_.retrieve(query, k);
}

std::size_t SpyRetriever::calls() const {
  std::lock_guard lock(mu_);
  return queries_.size();
}

std::vector<std::string> SpyRetriever::queries() const {
  std::lock_guard lock(mu_);
  return queries_;
}

}  // namespace mirage::retrieval
