#include "mirage/core/io.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <unistd.h>

#include "mirage/core/errors.hpp"
#include "mirage/core/instance.hpp"
#include "mirage/core/text.hpp"

namespace mirage {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<nlohmann::json> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      records.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw IoError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  return records;
}

std::string to_jsonl(const std::vector<nlohmann::json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  static std::atomic<unsigned> counter{0};
  auto tmp = path;
  tmp += fmt::format(".tmp.{}.{}", ::getpid(), counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename onto '" + path.string() + "'");
  }
}

std::vector<MirageInstance> load_dataset(const fs::path& path) {
  std::vector<MirageInstance> out;
  const auto records = read_jsonl(path);
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(parse_instance(r));
  return out;
}

void save_dataset(const fs::path& path, const std::vector<MirageInstance>& instances) {
  std::vector<nlohmann::json> records;
  records.reserve(instances.size());
  for (const auto& inst : instances) records.push_back(serialize_instance(inst));
  write_file_atomic(path, to_jsonl(records));
}

std::vector<Question> load_questions(const fs::path& path) {
  std::vector<Question> out;
  for (const auto& r : read_jsonl(path)) out.push_back(parse_question(r));
  return out;
}

}  // namespace mirage
