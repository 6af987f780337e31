#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mirage/core/errors.hpp"
#include "mirage/core/prediction.hpp"
#include "mirage/core/prompts.hpp"
#include "mirage/core/types.hpp"
#include "mirage/provider/provider.hpp"

namespace mirage::metrics {

class EmptyGold : public PreconditionError {
 public:
  EmptyGold() : PreconditionError("gold short answers are empty") {}
};

class LengthMismatch : public PreconditionError {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : PreconditionError("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class UnmatchedPrediction : public Error {
 public:
  explicit UnmatchedPrediction(std::string id)
      : Error("prediction '" + id + "' matches no gold instance"), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class JudgeFormatError : public Error {
 public:
  using Error::Error;
};

/// Fraction of gold shorts whose normalized form occurs in the normalized
/// long answer.
double str_em(std::string_view long_answer, std::span<const std::string> gold_shorts);

/// Multiset token F1 over normalized tokens. Both empty gives 1, one empty 0.
double token_f1(std::string_view pred, std::string_view gold);

struct ScorerQuery {
  std::string question;
  std::string context;
  std::optional<std::string> gold_hint;  // only the lexical scorer reads it
};

/// Reads a context and returns the span answering the question.
class ExtractiveScorer {
 public:
  virtual ~ExtractiveScorer() = default;
  virtual std::string extract(const ScorerQuery& q) const = 0;
  virtual std::string name() const = 0;
};

/// Deterministic offline scorer: the window of normalized context tokens with
/// the highest token F1 against the gold hint. Ties go to the earliest start,
/// then the shorter window. No hint or no overlap yields "".
class LexicalScorer : public ExtractiveScorer {
 public:
  std::string extract(const ScorerQuery& q) const override;
  std::string name() const override { return "lexical"; }
};

/// Span extraction through a model, using the extractive span prompt.
class ProviderScorer : public ExtractiveScorer {
 public:
  explicit ProviderScorer(provider::LlmClient client, const PromptLibrary& prompts = PromptLibrary::bundled())
      : client_(std::move(client)), prompts_(&prompts) {}
  std::string extract(const ScorerQuery& q) const override;
  std::string name() const override { return "provider:" + client_.model_name(); }

 private:
  provider::LlmClient client_;
  const PromptLibrary* prompts_;
};

/// Mean token F1 of the scorer's span per clarified question against the
/// paired gold short. Scorer failures score 0 with a warning.
double disambig_f1(std::string_view long_answer, std::span<const std::string> clarified,
                   std::span<const std::string> gold_shorts, const ExtractiveScorer& scorer,
                   std::vector<std::string>* warnings = nullptr);

struct JudgeScore {
  double relevance = 0;
  double faithfulness = 0;
  double informativeness = 0;
  double correctness = 0;
  double overall = 0;

  static JudgeScore from(double r, double f, double i, double c);
};

nlohmann::json to_json(const JudgeScore& s);

/// Reads the four criteria from a judge payload, clamping to [0, 5].
JudgeScore judge_from_payload(const nlohmann::json& payload, std::vector<std::string>* warnings = nullptr);

JudgeScore judge(std::string_view question, std::string_view predicted_long, std::string_view gold_long,
                 const provider::LlmClient& client, const PromptLibrary& prompts = PromptLibrary::bundled(),
                 std::vector<std::string>* warnings = nullptr);

struct InstanceMetrics {
  std::string question_id;
  double str_em = 0;
  double disambig_f1 = 0;
  std::optional<JudgeScore> judge;
};

struct MetricReport {
  double str_em = 0;       // in [0, 1]
  double disambig_f1 = 0;  // in [0, 1]
  double avg = 0;
  std::optional<JudgeScore> judge;
  std::size_t n = 0;
  std::vector<InstanceMetrics> per_instance;
  std::vector<std::string> warnings;
};

/// Short-answer metrics are written as percentages (x100).
nlohmann::json to_json(const MetricReport& r);

struct AggregateOptions {
  const ExtractiveScorer* scorer = nullptr;      // defaults to LexicalScorer
  const provider::LlmClient* judge = nullptr;    // judge only when set
  const PromptLibrary* prompts = nullptr;        // defaults to the bundled set
};

MetricReport aggregate(std::span<const PredictionRecord> predictions, std::span<const MirageInstance> gold,
                       const AggregateOptions& opts = {});

struct CorrelationReport {
  std::optional<double> pearson_r;
  std::optional<double> spearman_rho;
  std::optional<double> kendall_tau_b;
  std::optional<double> qwk;
};

nlohmann::json to_json(const CorrelationReport& r);

std::optional<double> pearson(std::span<const double> x, std::span<const double> y);
/// 1-based ranks with ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> v);
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);
/// Kendall tau-b with tie correction, O(n log n).
std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y);
/// Half-up rounding onto the 0..5 grid.
int to_grid(double v);
/// Quadratic weighted kappa on the 0..5 grid.
std::optional<double> qwk(std::span<const double> x, std::span<const double> y);

/// Throws LengthMismatch, or PreconditionError for fewer than two points.
CorrelationReport correlations(std::span<const double> x, std::span<const double> y);

}  // namespace mirage::metrics
