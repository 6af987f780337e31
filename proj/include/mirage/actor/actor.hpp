#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mirage/core/errors.hpp"
#include "mirage/core/prediction.hpp"
#include "mirage/core/prompts.hpp"
#include "mirage/planner/planner.hpp"
#include "mirage/provider/provider.hpp"
#include "mirage/retrieval/search.hpp"

namespace mirage::actor {

struct AgentAction {
  enum class Kind { Search, Planning, Answer };
  Kind kind = Kind::Answer;
  std::string argument;
};

std::string_view to_string(AgentAction::Kind k) noexcept;

class ActionParseError : public Error {
 public:
  explicit ActionParseError(std::string raw, const std::string& why)
      : Error("cannot parse agent action: " + why), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

struct ParsedAction {
  std::string thought;
  AgentAction action;
};

/// Line format (`THOUGHT:` / `ACTION: VERB[...]`) first, then a structured
/// payload {thought, action, argument}. `ANSWER[planning]` is a Planning
/// action.
ParsedAction parse_action(std::string_view completion);

struct AgentStep {
  int iteration = 0;
  std::string thought;
  AgentAction action;
  std::string observation;
  bool executed = true;  // false for locally rejected searches
  bool forced = false;   // the must-answer step after the budget is spent
};

struct AgentTranscript {
  std::vector<AgentStep> steps;
  int searches_used = 0;
  int iterations_used = 0;
  int parse_failures = 0;
  std::string final_answer;
  std::vector<std::string> warnings;
};

/// Budget, terminal-answer and duplicate-search checks; empty when the
/// transcript is well formed.
std::vector<std::string> transcript_violations(const AgentTranscript& t, int max_iterations, int max_searches);

nlohmann::json to_json(const AgentTranscript& t);

/// One record per step: {iteration, thought, action_kind, argument,
/// observation_digest, executed}.
std::vector<nlohmann::json> transcript_log(const AgentTranscript& t);

/// An episode aborted by a provider or retrieval failure.
class PartialTranscript : public Error {
 public:
  PartialTranscript(const std::string& what, AgentTranscript t) : Error(what), transcript_(std::move(t)) {}
  const AgentTranscript& transcript() const noexcept { return transcript_; }

 private:
  AgentTranscript transcript_;
};

enum class PlanningMode { Full, DetectOnly, Disabled };

struct AgentConfig {
  int max_iterations = 5;
  int max_searches = 5;
  std::size_t top_k = retrieval::kDefaultTopK;
  std::size_t snippet_chars = 600;
};

struct EpisodeResult {
  std::string final_answer;
  AgentTranscript transcript;
};

struct EpisodeContext {
  const retrieval::Retriever& retriever;
  const provider::LlmClient& agent;
  const planner::Planner* planner = nullptr;  // null disables the Planning action
  PlanningMode mode = PlanningMode::Full;
  AgentConfig cfg;
  const PromptLibrary& prompts = PromptLibrary::bundled();
};

/// Title plus the first `chars` characters of each passage, one per line.
std::string format_observation(std::span<const retrieval::RankedEvidence> hits, std::size_t chars);

/// The task text handed to the agent: the original question, followed by
/// the plan's clarified questions when there are any.
std::string working_task(const planner::Plan& plan, std::string_view note = {});

EpisodeResult run_episode(const Question& q, const planner::Plan& plan, const EpisodeContext& ctx,
                          std::string_view task_note = {});

/// Planner (per mode) followed by one episode. Episode failures become an
/// error record rather than an empty answer.
PredictionRecord answer_clarion(const Question& q, const EpisodeContext& ctx, std::string system = "clarion");

}  // namespace mirage::actor
