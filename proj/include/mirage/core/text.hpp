#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mirage {

/// SQuAD-style answer normalization over UTF-8 text.
///
/// Lowercases, replaces every code point in Unicode categories P* and S* by a
/// space, drops the whole tokens "a", "an" and "the", and collapses runs of
/// whitespace into single spaces. The result is trimmed and the function is
/// idempotent. Replacing (rather than deleting) punctuation makes "60° S" and
/// "60°S" normalize identically.
std::string normalize_text(std::string_view s);

/// Splits already-normalized text on single spaces. Empty input gives no tokens.
std::vector<std::string> split_tokens(std::string_view normalized);

/// normalize_text followed by split_tokens.
std::vector<std::string> normalized_tokens(std::string_view s);

std::string trim(std::string_view s);

/// Replaces each run of ASCII whitespace by one space and trims.
std::string collapse_whitespace(std::string_view s);

std::string to_lower_ascii(std::string_view s);

/// Truncates to at most `max_bytes` bytes without splitting a UTF-8 sequence.
std::string utf8_prefix(std::string_view s, std::size_t max_bytes);

/// Stable 64-bit FNV-1a digest, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view s);

}  // namespace mirage
