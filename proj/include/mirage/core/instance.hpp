#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mirage/core/types.hpp"

namespace mirage {

/// Maximum whitespace-token count of a short answer after normalization.
inline constexpr std::size_t kMaxShortAnswerTokens = 10;

enum class ViolationKind {
  EmptyQuestion,
  TooFewClarified,
  ClarifiedCountMismatch,
  ClarifiedSameAsQuestion,
  EmptyShortAnswer,
  DuplicateShortAnswers,
  ShortAnswerTooLong,
  LongAnswerMissingShort,
  UnknownSupportPassage,
  DuplicateEvidenceId,
};

std::string_view to_string(ViolationKind k) noexcept;

struct Violation {
  ViolationKind kind;
  std::string field;   // e.g. "short_answers[1].text"
  std::string detail;
};

/// Checks every MirageInstance invariant. Empty result means valid.
std::vector<Violation> validate_instance(const MirageInstance& inst);

/// Builds an instance from one dataset record. Throws SchemaError for the
/// first missing or ill-typed field and InvariantError for the first
/// violated invariant.
MirageInstance parse_instance(const nlohmann::json& record);

/// Inverse of parse_instance; unknown fields captured at parse time are
/// written back.
nlohmann::json serialize_instance(const MirageInstance& inst);

/// Parses the question-only record used as forge input: {id, question, hops?}.
Question parse_question(const nlohmann::json& record);
nlohmann::json serialize_question(const Question& q);

}  // namespace mirage
