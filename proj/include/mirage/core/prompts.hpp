#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mirage {

using Substitutions = std::vector<std::pair<std::string, std::string>>;

/// Replaces each occurrence of a placeholder token (e.g. "{{QUESTION}}" or
/// "{query}") with its value in a single left-to-right pass. Substituted
/// values are never re-scanned, so text that happens to contain a placeholder
/// is inserted literally. Unknown tokens are left untouched.
std::string render_template(std::string_view tmpl, const Substitutions& subs);

/// Prompt templates loaded from a directory of `<name>.txt` files, so prompts
/// can be edited without rebuilding.
class PromptLibrary {
 public:
  explicit PromptLibrary(const std::filesystem::path& dir);

  /// Library rooted at the bundled assets directory (or $MIRAGE_PROMPTS_DIR).
  static const PromptLibrary& bundled();
  static std::filesystem::path bundled_dir();

  /// Throws mirage::Error when the template does not exist.
  const std::string& get(std::string_view name) const;
  bool has(std::string_view name) const;

  std::string render(std::string_view name, const Substitutions& subs) const {
    return render_template(get(name), subs);
  }

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string, std::less<>> templates_;
};

}  // namespace mirage
