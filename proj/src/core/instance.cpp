#include "mirage/core/instance.hpp"

#include <set>

#include <fmt/format.h>

#include "mirage/core/errors.hpp"
#include "mirage/core/text.hpp"

namespace mirage {

using nlohmann::json;

std::string_view to_string(AmbiguityType t) noexcept {
  switch (t) {
    case AmbiguityType::Syntactic: return "syntactic";
    case AmbiguityType::General: return "general";
    case AmbiguityType::Semantic: return "semantic";
  }
  return "semantic";
}

std::optional<AmbiguityType> parse_ambiguity_type(std::string_view s) {
  const auto lower = to_lower_ascii(trim(s));
  for (auto t : kAmbiguityTypes) {
    if (lower == to_string(t)) return t;
  }
  return std::nullopt;
}

std::string_view to_string(ViolationKind k) noexcept {
  switch (k) {
    case ViolationKind::EmptyQuestion: return "EmptyQuestion";
    case ViolationKind::TooFewClarified: return "TooFewClarified";
    case ViolationKind::ClarifiedCountMismatch: return "ClarifiedCountMismatch";
    case ViolationKind::ClarifiedSameAsQuestion: return "ClarifiedSameAsQuestion";
    case ViolationKind::EmptyShortAnswer: return "EmptyShortAnswer";
    case ViolationKind::DuplicateShortAnswers: return "DuplicateShortAnswers";
    case ViolationKind::ShortAnswerTooLong: return "ShortAnswerTooLong";
    case ViolationKind::LongAnswerMissingShort: return "LongAnswerMissingShort";
    case ViolationKind::UnknownSupportPassage: return "UnknownSupportPassage";
    case ViolationKind::DuplicateEvidenceId: return "DuplicateEvidenceId";
  }
  return "Unknown";
}

std::vector<Violation> validate_instance(const MirageInstance& inst) {
  std::vector<Violation> out;
  auto add = [&](ViolationKind k, std::string field, std::string detail) {
    out.push_back({k, std::move(field), std::move(detail)});
  };

  const auto question_text = trim(inst.question.text);
  if (question_text.empty()) add(ViolationKind::EmptyQuestion, "question", "question text is blank");

  if (inst.clarified.size() < 2) {
    add(ViolationKind::TooFewClarified, "clarified_questions",
        fmt::format("{} clarified question(s), need at least 2", inst.clarified.size()));
  }
  if (inst.clarified.size() != inst.short_answers.size()) {
    add(ViolationKind::ClarifiedCountMismatch, "short_answers",
        fmt::format("{} clarified questions but {} short answers", inst.clarified.size(),
                    inst.short_answers.size()));
  }
  for (std::size_t i = 0; i < inst.clarified.size(); ++i) {
    if (trim(inst.clarified[i].text) == question_text) {
      add(ViolationKind::ClarifiedSameAsQuestion, fmt::format("clarified_questions[{}]", i),
          "clarified question repeats the original question");
    }
  }

  std::set<std::string> evidence_ids;
  for (std::size_t i = 0; i < inst.evidence.size(); ++i) {
    if (!evidence_ids.insert(inst.evidence[i].doc_id).second) {
      add(ViolationKind::DuplicateEvidenceId, fmt::format("evidence[{}].doc_id", i),
          "duplicate doc_id '" + inst.evidence[i].doc_id + "'");
    }
  }

  const auto long_norm = normalize_text(inst.long_answer);
  std::vector<std::string> short_norms;
  for (std::size_t i = 0; i < inst.short_answers.size(); ++i) {
    const auto& sa = inst.short_answers[i];
    const auto field = fmt::format("short_answers[{}]", i);
    auto norm = normalize_text(sa.text);
    if (norm.empty()) {
      add(ViolationKind::EmptyShortAnswer, field + ".text", "short answer is empty after normalization");
    } else {
      const auto ntok = split_tokens(norm).size();
      if (ntok > kMaxShortAnswerTokens) {
        add(ViolationKind::ShortAnswerTooLong, field + ".text",
            fmt::format("{} tokens (limit {})", ntok, kMaxShortAnswerTokens));
      }
      if (long_norm.find(norm) == std::string::npos) {
        add(ViolationKind::LongAnswerMissingShort, "long_answer",
            "long answer does not contain short answer '" + sa.text + "'");
      }
    }
    if (!evidence_ids.contains(sa.support_passage_id)) {
      add(ViolationKind::UnknownSupportPassage, field + ".support_passage_id",
          "passage '" + sa.support_passage_id + "' is not in the evidence set");
    }
    short_norms.push_back(std::move(norm));
  }
  for (std::size_t i = 0; i < short_norms.size(); ++i) {
    for (std::size_t j = i + 1; j < short_norms.size(); ++j) {
      if (!short_norms[i].empty() && short_norms[i] == short_norms[j]) {
        add(ViolationKind::DuplicateShortAnswers, fmt::format("short_answers[{}].text", j),
            fmt::format("equals short_answers[{}] after normalization", i));
      }
    }
  }
  return out;
}

namespace {

const std::set<std::string>& known_fields() {
  static const std::set<std::string> fields = {
      "id", "question", "hops", "ambiguity_type", "clarified_questions",
      "short_answers", "evidence", "long_answer"};
  return fields;
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path.empty() ? key : path + "." + key, "missing field");
  return *it;
}

std::string require_string(const json& obj, const std::string& key, const std::string& path = {}) {
  const auto& v = require(obj, key, path);
  const auto name = path.empty() ? key : path + "." + key;
  if (!v.is_string()) throw SchemaError(name, "expected a string");
  return v.get<std::string>();
}

const json& require_array(const json& obj, const std::string& key) {
  const auto& v = require(obj, key, {});
  if (!v.is_array()) throw SchemaError(key, "expected an array");
  return v;
}

std::optional<int> parse_hops(const json& record) {
  auto it = record.find("hops");
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) throw SchemaError("hops", "expected a positive integer");
  const auto v = it->get<long long>();
  if (v < 1) throw SchemaError("hops", "expected a positive integer");
  return static_cast<int>(v);
}

}  // namespace

Question parse_question(const json& record) {
  if (!record.is_object()) throw SchemaError("<record>", "expected an object");
  Question q;
  q.id = require_string(record, "id");
  q.text = require_string(record, "question");
  q.hops = parse_hops(record);
  if (trim(q.text).empty()) throw InvariantError("EmptyQuestion", "question '" + q.id + "' is blank");
  return q;
}

json serialize_question(const Question& q) {
  json j = {{"id", q.id}, {"question", q.text}};
  if (q.hops) j["hops"] = *q.hops;
  return j;
}

MirageInstance parse_instance(const json& record) {
  if (!record.is_object()) throw SchemaError("<record>", "expected an object");
  MirageInstance inst;
  inst.question.id = require_string(record, "id");
  inst.question.text = require_string(record, "question");
  inst.question.hops = parse_hops(record);

  const auto type_text = require_string(record, "ambiguity_type");
  auto type = parse_ambiguity_type(type_text);
  if (!type) throw SchemaError("ambiguity_type", "unknown ambiguity type '" + type_text + "'");
  inst.type = *type;

  const auto& clarified = require_array(record, "clarified_questions");
  for (std::size_t i = 0; i < clarified.size(); ++i) {
    if (!clarified[i].is_string()) {
      throw SchemaError(fmt::format("clarified_questions[{}]", i), "expected a string");
    }
    inst.clarified.push_back({inst.question.id, inst.type, clarified[i].get<std::string>(),
                              static_cast<int>(i + 1)});
  }

  const auto& shorts = require_array(record, "short_answers");
  for (std::size_t i = 0; i < shorts.size(); ++i) {
    const auto path = fmt::format("short_answers[{}]", i);
    ShortAnswer sa;
    sa.clarified_index = static_cast<int>(i + 1);
    sa.text = require_string(shorts[i], "text", path);
    sa.support_passage_id = require_string(shorts[i], "support_passage_id", path);
    inst.short_answers.push_back(std::move(sa));
  }

  const auto& evidence = require_array(record, "evidence");
  for (std::size_t i = 0; i < evidence.size(); ++i) {
    const auto path = fmt::format("evidence[{}]", i);
    Passage p;
    p.doc_id = require_string(evidence[i], "doc_id", path);
    p.title = require_string(evidence[i], "title", path);
    p.text = require_string(evidence[i], "text", path);
    inst.evidence.push_back(std::move(p));
  }

  inst.long_answer = require_string(record, "long_answer");

  for (const auto& [key, value] : record.items()) {
    if (!known_fields().contains(key)) inst.extra[key] = value;
  }

  const auto violations = validate_instance(inst);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw InvariantError(std::string(to_string(v.kind)), v.field + ": " + v.detail);
  }
  return inst;
}

json serialize_instance(const MirageInstance& inst) {
  json j = inst.extra.is_object() ? inst.extra : json::object();
  j["id"] = inst.question.id;
  j["question"] = inst.question.text;
  if (inst.question.hops) j["hops"] = *inst.question.hops;
  j["ambiguity_type"] = std::string(to_string(inst.type));
  j["clarified_questions"] = json::array();
  for (const auto& c : inst.clarified) j["clarified_questions"].push_back(c.text);
  j["short_answers"] = json::array();
  for (const auto& sa : inst.short_answers) {
    j["short_answers"].push_back({{"text", sa.text}, {"support_passage_id", sa.support_passage_id}});
  }
  j["evidence"] = json::array();
  for (const auto& p : inst.evidence) {
    j["evidence"].push_back({{"doc_id", p.doc_id}, {"title", p.title}, {"text", p.text}});
  }
  j["long_answer"] = inst.long_answer;
  return j;
}

}  // namespace mirage
