#include "mirage/planner/planner.hpp"

#include <spdlog/spdlog.h>

#include "mirage/core/text.hpp"
#include "mirage/provider/structured.hpp"

namespace mirage::planner {

nlohmann::json to_json(const AmbiguityAnalysis& a) {
  return {{"reasoning", a.reasoning},
          {"is_ambiguous", a.is_ambiguous},
          {"ambiguity_type", a.type ? std::string(to_string(*a.type)) : std::string("none")},
          {"ambiguous_aspects", a.aspects},
          {"clarification_needed", a.clarification_needed}};
}

AmbiguityAnalysis analysis_from_json(const nlohmann::json& payload) {
  if (!payload.is_object()) throw PlannerFormatError("analysis payload is not an object");
  for (const char* key : {"is_ambiguous", "ambiguity_type"}) {
    if (!payload.contains(key)) throw PlannerFormatError(std::string("analysis lacks '") + key + "'");
  }
  AmbiguityAnalysis a;
  const auto flag = provider::parse_yes_no(payload["is_ambiguous"]);
  if (!flag) throw PlannerFormatError("unreadable is_ambiguous " + payload["is_ambiguous"].dump());
  a.is_ambiguous = *flag;

  const auto& type_value = payload["ambiguity_type"];
  if (!type_value.is_string()) throw PlannerFormatError("ambiguity_type is not a string");
  const auto type_text = to_lower_ascii(trim(type_value.get<std::string>()));
  a.type = parse_ambiguity_type(type_text);
  if (!a.type && type_text != "none") throw PlannerFormatError("unknown ambiguity_type '" + type_text + "'");

  if (a.is_ambiguous && !a.type) throw PlannerFormatError("ambiguous query with ambiguity_type none");
  if (!a.is_ambiguous && a.type) throw PlannerFormatError("unambiguous query with ambiguity_type " + type_text);

  if (payload.contains("reasoning") && payload["reasoning"].is_string()) a.reasoning = payload["reasoning"];
  if (payload.contains("clarification_needed") && payload["clarification_needed"].is_string()) {
    a.clarification_needed = payload["clarification_needed"];
  }
  if (payload.contains("ambiguous_aspects") && payload["ambiguous_aspects"].is_array()) {
    for (const auto& s : payload["ambiguous_aspects"]) {
      if (s.is_string()) a.aspects.push_back(s.get<std::string>());
    }
  }
  return a;
}

nlohmann::json to_json(const Plan& p) {
  nlohmann::json clarified = nlohmann::json::array();
  for (const auto& c : p.clarified) clarified.push_back(c.text);
  return {{"question_id", p.original.id}, {"analysis", to_json(p.analysis)}, {"clarified", std::move(clarified)}};
}

AmbiguityAnalysis unambiguous_analysis(std::string reasoning) {
  AmbiguityAnalysis a;
  a.reasoning = std::move(reasoning);
  return a;
}

std::string Planner::analyze_prompt(const Question& q) const {
  return prompts_->render("planner_analyze", {{"{query}", q.text}});
}

std::string Planner::clarify_prompt(const Question& q, const AmbiguityAnalysis& a) const {
  return prompts_->render("planner_clarify", {{"{query}", q.text}, {"{analysis}", to_json(a).dump()}});
}

AmbiguityAnalysis Planner::analyze(const Question& q) const {
  const auto reply = client_.complete(analyze_prompt(q));
  try {
    return analysis_from_json(provider::extract_structured(reply.text));
  } catch (const provider::PayloadError& e) {
    throw PlannerFormatError(e.what());
  }
}

Plan Planner::make_plan(const Question& q, const AmbiguityAnalysis& analysis) const {
  Plan plan{q, analysis, {}};
  if (!analysis.is_ambiguous) return plan;
  const auto reply = client_.complete(clarify_prompt(q, analysis));
  nlohmann::json payload;
  try {
    payload = provider::extract_structured(reply.text, {"clarified_query1", "clarified_query2"});
  } catch (const provider::PayloadError& e) {
    throw PlannerFormatError(e.what());
  }
  int index = 1;
  for (const char* key : {"clarified_query1", "clarified_query2"}) {
    if (!payload[key].is_string()) throw PlannerFormatError(std::string(key) + " is not a string");
    auto text = trim(payload[key].get<std::string>());
    if (text.empty()) throw PlannerFormatError(std::string(key) + " is empty");
    plan.clarified.push_back({q.id, *analysis.type, std::move(text), index++});
  }
  return plan;
}

Plan Planner::plan(const Question& q, std::vector<std::string>* warnings) const {
  auto warn = [&](const std::string& msg) {
    spdlog::warn("planner on '{}': {}", q.id, msg);
    if (warnings) warnings->push_back(msg);
  };
  std::optional<AmbiguityAnalysis> analysis;
  for (int attempt = 0; attempt < 2 && !analysis; ++attempt) {
    try {
      analysis = analyze(q);
    } catch (const PlannerFormatError& e) {
      warn(std::string("analysis unreadable: ") + e.what());
    }
  }
  if (!analysis) {
    warn("treating the question as unambiguous");
    return Plan{q, unambiguous_analysis("planner output unreadable"), {}};
  }
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      return make_plan(q, *analysis);
    } catch (const PlannerFormatError& e) {
      warn(std::string("clarification unreadable: ") + e.what());
    }
  }
  warn("treating the question as unambiguous");
  return Plan{q, unambiguous_analysis("planner clarification unreadable"), {}};
}

}  // namespace mirage::planner
