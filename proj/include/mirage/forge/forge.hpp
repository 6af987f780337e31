#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mirage/core/errors.hpp"
#include "mirage/core/prompts.hpp"
#include "mirage/core/types.hpp"
#include "mirage/cues/cues.hpp"
#include "mirage/provider/provider.hpp"
#include "mirage/retrieval/search.hpp"

namespace mirage::forge {

class EmptyVerdicts : public PreconditionError {
 public:
  EmptyVerdicts() : PreconditionError("consensus needs at least one verdict") {}
};

class TooFewClarifications : public Error {
 public:
  TooFewClarifications(std::size_t got, std::size_t need)
      : Error("generator produced " + std::to_string(got) + " clarified question(s), need " +
              std::to_string(need)) {}
};

class DecompositionEmpty : public Error {
 public:
  DecompositionEmpty() : Error("decomposition produced no sub-questions") {}
};

class LongAnswerMissingShort : public Error {
 public:
  explicit LongAnswerMissingShort(const std::string& short_text)
      : Error("long answer does not contain short answer '" + short_text + "'") {}
};

class ShorteningFailed : public Error {
 public:
  explicit ShorteningFailed(std::size_t tokens)
      : Error("shortened answer still has " + std::to_string(tokens) + " tokens") {}
};

/// A judge shares its model with the generator.
class GeneratorJudgeOverlap : public PreconditionError {
 public:
  explicit GeneratorJudgeOverlap(const std::string& model)
      : PreconditionError("judge model '" + model + "' is also the generator") {}
};

struct DetectorVerdict {
  std::string detector_id;
  std::array<bool, 3> votes{};  // indexed by type_index
  std::vector<std::string> warnings;

  bool vote(AmbiguityType t) const { return votes[type_index(t)]; }
};

struct ConsensusLabel {
  std::string question_id;
  std::vector<AmbiguityType> types;  // in kAmbiguityTypes order

  bool has(AmbiguityType t) const;
};

/// Stage markers are cumulative: reaching a stage implies every earlier one.
enum class Stage { None, Detected, Clarified, Evidenced, Answered, Filtered };

struct CandidateInstance {
  MirageInstance instance;
  Stage reached = Stage::None;

  bool at_least(Stage s) const { return static_cast<int>(reached) >= static_cast<int>(s); }
};

/// One vote per type from a single detector. Malformed payloads and provider
/// failures other than AuthError become a 0 vote with a warning. `cues` feeds
/// the general-ambiguity prompt; absent values render as "n/a".
DetectorVerdict detect_types(const Question& q, const provider::LlmClient& detector, const PromptLibrary& prompts,
                             const std::optional<cues::GeneralAmbiguityCues>& cues = std::nullopt);

std::vector<DetectorVerdict> detect_types(const Question& q, std::span<const provider::LlmClient> detectors,
                                          const PromptLibrary& prompts,
                                          const std::optional<cues::GeneralAmbiguityCues>& cues = std::nullopt);

/// Full-agreement rule: a type is assigned only when every verdict votes 1.
ConsensusLabel consensus(std::string question_id, std::span<const DetectorVerdict> verdicts);

std::vector<ClarifiedQuestion> clarify_for_type(const Question& q, AmbiguityType t, const provider::LlmClient& generator,
                                                const PromptLibrary& prompts, std::size_t min_versions = 2);

/// Sub-questions from a decomposition reply: bullet or numbered lines first,
/// then a `sub_query` / `sub_queries` payload.
std::vector<std::string> parse_sub_questions(std::string_view reply);

std::vector<std::string> decompose(const ClarifiedQuestion& c, const provider::LlmClient& generator,
                                   const PromptLibrary& prompts);

/// Pools top-k results of every sub-question (deduplicated by doc_id), backfills
/// with the clarified question itself while the pool holds fewer than k
/// passages, then reranks the pool against the clarified question.
std::vector<retrieval::RankedEvidence> collect_documents(const ClarifiedQuestion& c,
                                                         std::span<const std::string> sub_questions,
                                                         const retrieval::Retriever& retriever,
                                                         std::size_t k = retrieval::kDefaultTopK);

std::vector<retrieval::RankedEvidence> collect_documents(const ClarifiedQuestion& c,
                                                         const retrieval::Retriever& retriever,
                                                         const provider::LlmClient& generator,
                                                         const PromptLibrary& prompts,
                                                         std::size_t k = retrieval::kDefaultTopK);

/// Text shown to the span extractor and checked for the verbatim span.
std::string passage_context(const Passage& p);

/// First verified extractive span over the pool in rank order.
std::optional<ShortAnswer> generate_short_answer(const ClarifiedQuestion& c,
                                                 std::span<const retrieval::RankedEvidence> evidence,
                                                 const provider::LlmClient& generator, const PromptLibrary& prompts);

/// Returns `a` unchanged when it fits the token limit, otherwise the
/// generator's shortened form (one retry).
ShortAnswer shorten_answer(const ShortAnswer& a, const ClarifiedQuestion& c, const provider::LlmClient& generator,
                           const PromptLibrary& prompts);

/// True when every pair of short answers differs after normalization.
bool dedup_filter(std::span<const ShortAnswer> shorts);

std::string generate_long_answer(const Question& q, std::span<const ClarifiedQuestion> clarified,
                                 std::span<const ShortAnswer> shorts, const provider::LlmClient& generator,
                                 const PromptLibrary& prompts);

/// Throws GeneratorJudgeOverlap when a judge uses the generator's model.
void check_judges(std::span<const provider::LlmClient> judges, const std::string& generator_model);

/// Keep only when every judge says aligned; malformed replies count as N.
bool alignment_filter(const MirageInstance& candidate, std::span<const provider::LlmClient> judges,
                      const std::string& generator_model, const PromptLibrary& prompts,
                      std::vector<std::string>* warnings = nullptr);

inline constexpr std::array<std::string_view, 10> kLedgerStages = {
    "questions",     "detected",  "clarified",    "evidenced", "short_answered",
    "shortened",     "deduplicated", "long_answered", "aligned",   "final"};

struct LedgerNote {
  std::string question_id;
  std::optional<AmbiguityType> type;
  std::string stage;
  std::string reason;
};

/// Survivor counts after each stage. "questions" counts input questions; the
/// remaining stages count (question, type) pairs.
struct StageLedger {
  std::size_t questions = 0;
  std::array<std::array<std::size_t, 3>, kLedgerStages.size()> per_type{};
  std::vector<LedgerNote> notes;

  std::size_t total(std::size_t stage) const;
  std::size_t stage_index(std::string_view name) const;
  /// Non-increasing from "detected" onward, overall and per type.
  bool monotone() const;
};

nlohmann::json to_json(const StageLedger& ledger);

struct ForgeConfig {
  std::vector<provider::LlmClient> detectors;
  provider::LlmClient generator;
  std::vector<provider::LlmClient> judges;
  std::size_t top_k = retrieval::kDefaultTopK;
  std::size_t workers = 4;
  std::size_t min_clarified = 2;
};

struct ForgeResult {
  std::vector<MirageInstance> instances;
  StageLedger ledger;
};

/// Runs the whole construction pipeline. Per-question failures become ledger
/// notes; only AuthError and configuration errors escape. Output order follows
/// input order, then the fixed type order.
ForgeResult run_pipeline(std::span<const Question> questions, const retrieval::Retriever& retriever,
                         const ForgeConfig& cfg, const PromptLibrary& prompts = PromptLibrary::bundled());

}  // namespace mirage::forge
