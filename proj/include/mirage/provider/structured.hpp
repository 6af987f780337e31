#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mirage/core/errors.hpp"

namespace mirage::provider {

class PayloadError : public Error {
 public:
  using Error::Error;
};

/// No balanced `{...}` object anywhere in the text.
class NoPayload : public PayloadError {
 public:
  NoPayload() : PayloadError("no structured payload found") {}
};

class MissingKey : public PayloadError {
 public:
  explicit MissingKey(std::string key)
      : PayloadError("structured payload lacks key '" + key + "'"), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class ParseError : public PayloadError {
 public:
  ParseError(std::size_t position, const std::string& detail)
      : PayloadError("payload parse error at offset " + std::to_string(position) + ": " + detail),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Byte range [begin, end) of a balanced object starting at the first `{` at
/// or after `from`. String literals (with escapes) are skipped while counting
/// braces. Returns nullopt when no `{` has a matching `}`.
std::optional<std::pair<std::size_t, std::size_t>> find_balanced_object(std::string_view text,
                                                                        std::size_t from = 0);

/// Finds the first balanced top-level object in `text` that parses as JSON,
/// tolerating prose and code fences around it, and checks that it carries
/// every key in `required_keys`.
nlohmann::json extract_structured(std::string_view text,
                                  const std::vector<std::string>& required_keys = {});

/// Same as extract_structured but returns nullopt on any PayloadError.
std::optional<nlohmann::json> try_extract_structured(std::string_view text,
                                                     const std::vector<std::string>& required_keys = {});

/// Reads a Y/N style verdict: "Y"/"yes"/true -> true, "N"/"no"/false -> false.
/// Anything else is nullopt.
std::optional<bool> parse_yes_no(const nlohmann::json& v);

}  // namespace mirage::provider
