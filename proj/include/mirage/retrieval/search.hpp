#pragma once

#include <mutex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mirage/core/types.hpp"
#include "mirage/retrieval/corpus.hpp"

namespace mirage::retrieval {

/// Default retrieval depth.
inline constexpr std::size_t kDefaultTopK = 10;

/// Where a piece of evidence came from.
struct Origin {
  enum class Kind { Query, SubQuestion, Backfill };
  Kind kind = Kind::Query;
  int index = 0;  // sub-question ordinal (1-based) for Kind::SubQuestion

  static Origin query() { return {Kind::Query, 0}; }
  static Origin sub_question(int i) { return {Kind::SubQuestion, i}; }
  static Origin backfill() { return {Kind::Backfill, 0}; }

  std::string to_string() const;
  bool operator==(const Origin&) const = default;
};

struct RankedEvidence {
  Passage passage;
  double score = 0.0;  // cosine similarity, in [-1, 1]
  Origin origin;
  std::size_t corpus_index = 0;
};

/// Exact top-k by cosine similarity against a unit query vector. Results are
/// sorted by descending score, ties broken by ascending corpus index; at most
/// min(k, corpus size) entries.
std::vector<RankedEvidence> search(const Corpus& corpus, std::span<const float> query_unit, std::size_t k);

/// Embeds `query` and runs the exact search above.
std::vector<RankedEvidence> search(const Corpus& corpus, std::string_view query, std::size_t k,
                                   const Embedder& embedder);

/// Re-scores `pool` by similarity to the clarified question and sorts it by
/// descending score; equal scores keep their pool order.
std::vector<RankedEvidence> rerank(const ClarifiedQuestion& clarified, std::vector<RankedEvidence> pool,
                                   const Embedder& embedder);

/// The search surface the agents and baselines depend on, so tests can spy on
/// retrieval calls.
class Retriever {
 public:
  virtual ~Retriever() = default;
  virtual std::vector<RankedEvidence> retrieve(std::string_view query, std::size_t k) const = 0;
  virtual const Corpus& corpus() const = 0;
  virtual const Embedder& embedder() const = 0;
};

class CorpusRetriever : public Retriever {
 public:
  CorpusRetriever(std::shared_ptr<const Corpus> corpus, std::shared_ptr<const Embedder> embedder)
      : corpus_(std::move(corpus)), embedder_(std::move(embedder)) {}

  std::vector<RankedEvidence> retrieve(std::string_view query, std::size_t k) const override {
    return search(*corpus_, query, k, *embedder_);
  }
  const Corpus& corpus() const override { return *corpus_; }
  const Embedder& embedder() const override { return *embedder_; }

 private:
  std::shared_ptr<const Corpus> corpus_;
  std::shared_ptr<const Embedder> embedder_;
};

/// Counts retrieve() calls and remembers the queries.
class SpyRetriever : public Retriever {
 public:
  explicit SpyRetriever(const Retriever& inner) : inner_(inner) {}

  std::vector<RankedEvidence> retrieve(std::string_view query, std::size_t k) const override;
  const Corpus& corpus() const override { return inner_.corpus(); }
  const Embedder& embedder() const override { return inner_.embedder(); }

  std::size_t calls() const;
  std::vector<std::string> queries() const;

 private:
  const Retriever& inner_;
  mutable std::mutex mu_;
  mutable std::vector<std::string> queries_;
};

}  // namespace mirage::retrieval
