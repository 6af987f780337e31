#include "mirage/core/prompts.hpp"

#include <cstdlib>

#include "mirage/core/errors.hpp"
#include "mirage/core/io.hpp"

#ifndef MIRAGE_DEFAULT_PROMPTS_DIR
#define MIRAGE_DEFAULT_PROMPTS_DIR "assets/prompts"
#endif

namespace mirage {

std::string render_template(std::string_view tmpl, const Substitutions& subs) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    bool replaced = false;
    if (tmpl[i] == '{') {
      for (const auto& [token, value] : subs) {
        if (!token.empty() && tmpl.compare(i, token.size(), token) == 0) {
          out += value;
          i += token.size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out.push_back(tmpl[i++]);
  }
  return out;
}

PromptLibrary::PromptLibrary(const std::filesystem::path& dir) : dir_(dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("prompt directory '" + dir.string() + "' does not exist");
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    templates_.emplace(entry.path().stem().string(), read_text_file(entry.path()));
  }
}

std::filesystem::path PromptLibrary::bundled_dir() {
  if (const char* env = std::getenv("MIRAGE_PROMPTS_DIR"); env != nullptr && *env != '\0') return env;
  return MIRAGE_DEFAULT_PROMPTS_DIR;
}

const PromptLibrary& PromptLibrary::bundled() {
  static const PromptLibrary lib(bundled_dir());
  return lib;
}

const std::string& PromptLibrary::get(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) {
    throw Error("prompt template '" + std::string(name) + "' not found in " + dir_.string());
  }
  return it->second;
}

bool PromptLibrary::has(std::string_view name) const { return templates_.find(name) != templates_.end(); }

}  // namespace mirage
