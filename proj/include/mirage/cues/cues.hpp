#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mirage/core/errors.hpp"
#include "mirage/core/prompts.hpp"
#include "mirage/retrieval/search.hpp"

namespace mirage::cues {

/// Additive smoothing mass given to every vocabulary item before
/// renormalization.
inline constexpr double kSmoothingEpsilon = 1e-6;

class EmptySnippets : public Error {
 public:
  EmptySnippets() : Error("top-k retrieval produced no snippet tokens") {}
};

/// Unigram counts over normalized tokens, ordered for deterministic sums.
using TokenCounts = std::map<std::string, std::size_t, std::less<>>;

/// Tokens counted for a passage: normalized title and body.
std::vector<std::string> passage_tokens(const Passage& p);

/// Conjunctive term-containment index over a corpus.
class HitIndex {
 public:
  explicit HitIndex(const retrieval::Corpus& corpus);

  /// Number of passages containing every normalized token of `query`. A query
  /// with no tokens matches every passage.
  std::size_t total_hits(std::string_view query) const;

  const TokenCounts& corpus_counts() const noexcept { return corpus_counts_; }
  std::size_t size() const noexcept { return docs_.size(); }

 private:
  std::vector<std::vector<std::string>> docs_;  // sorted unique tokens per passage
  TokenCounts corpus_counts_;
};

std::size_t total_hits(std::string_view query, const retrieval::Corpus& corpus);

/// KL(P_top || P_corpus) in nats. Both distributions are add-epsilon smoothed
/// over the union vocabulary and renormalized; epsilon = 0 gives the raw
/// divergence (items with P_top = 0 contribute nothing). Throws EmptySnippets
/// when `top` is empty and PreconditionError when `corpus` is.
double kl_divergence(const TokenCounts& top, const TokenCounts& corpus,
                     double epsilon = kSmoothingEpsilon);

/// KL divergence between the top-k retrieved snippets for `query` and the
/// whole corpus.
double kl_divergence(std::string_view query, const retrieval::Retriever& retriever, std::size_t k,
                     const HitIndex& index);

struct Constraint {
  enum class Kind { Date, Year, Number, Quoted };
  Kind kind = Kind::Number;
  std::string text;        // the constraint itself, e.g. "1920"
  std::size_t begin = 0;   // removed byte range in the query, including a
  std::size_t end = 0;     // governing preposition such as "in"
};

std::string_view to_string(Constraint::Kind k) noexcept;

struct RelaxVariant {
  std::string text;
  Constraint removed;
};

/// Whitespace and punctuation tidy-up applied to every variant: collapses
/// spaces, drops spaces in front of , . ; : ? ! and merges doubled commas.
std::string tidy_variant(std::string_view s);

/// One variant per detected constraint (double-quoted spans, dates, 4-digit
/// years, standalone numbers), each removing exactly that constraint. Overlaps
/// resolve in that priority order. Variants are ordered by position.
std::vector<RelaxVariant> relax_variants(std::string_view query);

/// max over variants of H(variant) / H(query); nullopt when there is no
/// variant or H(query) = 0.
std::optional<double> relax_delta_ratio(std::string_view query, const HitIndex& index);

struct GeneralAmbiguityCues {
  std::size_t total_hits = 0;
  std::optional<double> kl_divergence;  // absent when retrieval gave no tokens
  std::optional<double> relax_delta_ratio;
  std::vector<RelaxVariant> variants;
};

GeneralAmbiguityCues compute_cues(std::string_view query, const retrieval::Retriever& retriever,
                                  const HitIndex& index, std::size_t k = retrieval::kDefaultTopK);

nlohmann::json to_json(const GeneralAmbiguityCues& cues);

/// Fills the general-ambiguity detection template. Missing cues (or missing
/// individual values) render as "n/a".
std::string render_cue_prompt(std::string_view question, const std::optional<GeneralAmbiguityCues>& cues,
                              const PromptLibrary& prompts = PromptLibrary::bundled());

}  // namespace mirage::cues
