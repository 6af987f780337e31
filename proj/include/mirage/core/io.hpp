#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mirage/core/types.hpp"

namespace mirage {

/// Reads newline-delimited JSON records. Blank lines are skipped; a line that
/// fails to parse raises IoError naming the file and line number.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

std::string to_jsonl(const std::vector<nlohmann::json>& records);

std::string read_text_file(const std::filesystem::path& path);

/// Writes `contents` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::vector<MirageInstance> load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const std::vector<MirageInstance>& instances);

std::vector<Question> load_questions(const std::filesystem::path& path);

}  // namespace mirage
