#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mirage/core/errors.hpp"
#include "mirage/core/prompts.hpp"
#include "mirage/core/types.hpp"
#include "mirage/provider/provider.hpp"

namespace mirage::planner {

class PlannerFormatError : public Error {
 public:
  using Error::Error;
};

struct AmbiguityAnalysis {
  std::string reasoning;
  bool is_ambiguous = false;
  std::optional<AmbiguityType> type;  // nullopt serializes as "none"
  std::vector<std::string> aspects;
  std::string clarification_needed;
};

nlohmann::json to_json(const AmbiguityAnalysis& a);

/// Validates a planner payload. `is_ambiguous` and `ambiguity_type` are
/// required and must agree: ambiguous exactly when the type is not "none".
AmbiguityAnalysis analysis_from_json(const nlohmann::json& payload);

struct Plan {
  Question original;
  AmbiguityAnalysis analysis;
  std::vector<ClarifiedQuestion> clarified;  // empty or exactly two

  bool valid() const { return analysis.is_ambiguous ? clarified.size() == 2 : clarified.empty(); }
};

nlohmann::json to_json(const Plan& p);

/// The unambiguous fallback used when the planner output stays unreadable.
AmbiguityAnalysis unambiguous_analysis(std::string reasoning);

class Planner {
 public:
  explicit Planner(provider::LlmClient client, const PromptLibrary& prompts = PromptLibrary::bundled())
      : client_(std::move(client)), prompts_(&prompts) {}

  std::string analyze_prompt(const Question& q) const;
  std::string clarify_prompt(const Question& q, const AmbiguityAnalysis& a) const;

  /// Throws PlannerFormatError on a missing or inconsistent payload.
  AmbiguityAnalysis analyze(const Question& q) const;

  /// Unambiguous analyses yield an empty plan without calling the model.
  Plan make_plan(const Question& q, const AmbiguityAnalysis& analysis) const;

  /// analyze + make_plan, each retried once on PlannerFormatError before
  /// degrading to the unambiguous plan. Provider errors propagate.
  Plan plan(const Question& q, std::vector<std::string>* warnings = nullptr) const;

  const provider::LlmClient& client() const noexcept { return client_; }

 private:
  provider::LlmClient client_;
  const PromptLibrary* prompts_;
};

}  // namespace mirage::planner
