#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mirage {

/// One system output for one question, shared by every answering system.
struct PredictionRecord {
  std::string question_id;
  std::string system;
  std::string long_answer;
  std::optional<std::map<int, std::string>> extracted;  // clarified index -> span
  std::optional<std::string> transcript_ref;
  nlohmann::json transcript;  // null unless the system keeps one
  std::optional<std::string> error;

  bool ok() const { return !error && !long_answer.empty(); }
};

nlohmann::json to_json(const PredictionRecord& r);
PredictionRecord prediction_from_json(const nlohmann::json& j);

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);
void save_predictions(const std::filesystem::path& path, const std::vector<PredictionRecord>& records);

}  // namespace mirage
