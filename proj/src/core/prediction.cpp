#include "mirage/core/prediction.hpp"

#include "mirage/core/errors.hpp"
#include "mirage/core/io.hpp"

namespace mirage {

nlohmann::json to_json(const PredictionRecord& r) {
  nlohmann::json j = {{"question_id", r.question_id}, {"system", r.system}, {"long_answer", r.long_answer}};
  if (r.extracted) {
    nlohmann::json ex = nlohmann::json::object();
    for (const auto& [k, v] : *r.extracted) ex[std::to_string(k)] = v;
    j["extracted"] = std::move(ex);
  }
  if (r.transcript_ref) j["transcript_ref"] = *r.transcript_ref;
  if (!r.transcript.is_null()) j["transcript"] = r.transcript;
  if (r.error) j["error"] = *r.error;
  return j;
}

PredictionRecord prediction_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("<prediction>", "expected an object");
  PredictionRecord r;
  for (const char* key : {"question_id", "system", "long_answer"}) {
    if (!j.contains(key) || !j[key].is_string()) throw SchemaError(key, "missing or not a string");
  }
  r.question_id = j["question_id"];
  r.system = j["system"];
  r.long_answer = j["long_answer"];
  if (j.contains("extracted") && j["extracted"].is_object()) {
    std::map<int, std::string> ex;
    for (const auto& [k, v] : j["extracted"].items()) {
      if (!v.is_string()) throw SchemaError("extracted." + k, "not a string");
      try {
        ex[std::stoi(k)] = v.get<std::string>();
      } catch (const std::logic_error&) {
        throw SchemaError("extracted." + k, "key is not an integer");
      }
    }
    r.extracted = std::move(ex);
  }
  if (j.contains("transcript_ref") && j["transcript_ref"].is_string()) r.transcript_ref = j["transcript_ref"];
  if (j.contains("transcript")) r.transcript = j["transcript"];
  if (j.contains("error") && j["error"].is_string()) r.error = j["error"];
  return r;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  std::vector<PredictionRecord> out;
  for (const auto& j : read_jsonl(path)) out.push_back(prediction_from_json(j));
  return out;
}

void save_predictions(const std::filesystem::path& path, const std::vector<PredictionRecord>& records) {
  std::vector<nlohmann::json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(to_json(r));
  write_file_atomic(path, to_jsonl(rows));
}

}  // namespace mirage
