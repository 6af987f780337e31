#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mirage/core/errors.hpp"
#include "mirage/core/prediction.hpp"
#include "mirage/core/prompts.hpp"
#include "mirage/provider/provider.hpp"
#include "mirage/retrieval/search.hpp"

namespace mirage::baselines {

class EmptyAnswer : public Error {
 public:
  explicit EmptyAnswer(const std::string& system) : Error(system + " produced an empty answer") {}
};

enum class EvidenceLabel { Useful, PartialUseful, Useless };

std::string_view to_string(EvidenceLabel l) noexcept;

/// Accepts "useful", "partial_useful" (also "partial-useful", "partially
/// useful") and "useless", case-insensitively.
std::optional<EvidenceLabel> parse_evidence_label(std::string_view s);

/// Numbered passages for read prompts, in the given order.
std::string format_passages(std::span<const retrieval::RankedEvidence> passages);

PredictionRecord answer_no_retrieval(const Question& q, const provider::LlmClient& client,
                                     const PromptLibrary& prompts = PromptLibrary::bundled());

PredictionRecord answer_naive_rag(const Question& q, const retrieval::Retriever& retriever,
                                  const provider::LlmClient& client, std::size_t k = retrieval::kDefaultTopK,
                                  const PromptLibrary& prompts = PromptLibrary::bundled());

struct DivaConfig {
  std::size_t interpretations = 3;
  std::size_t top_k = retrieval::kDefaultTopK;
};

/// Intermediate state of a DIVA run, for tests and audit.
struct DivaTrace {
  std::vector<std::string> interpretations;
  std::vector<retrieval::RankedEvidence> pool;
  EvidenceLabel label = EvidenceLabel::PartialUseful;
  std::string final_prompt;
  std::vector<std::string> warnings;
};

/// Diversify, verify and adapt. A failed diversification falls back to the
/// original question; an unreadable verify label counts as PartialUseful.
PredictionRecord answer_diva(const Question& q, const retrieval::Retriever& retriever,
                             const provider::LlmClient& client, const DivaConfig& cfg = {},
                             const PromptLibrary& prompts = PromptLibrary::bundled(), DivaTrace* trace = nullptr);

}  // namespace mirage::baselines
