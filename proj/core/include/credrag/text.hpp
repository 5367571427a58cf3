#pragma once

#include <string>
#include <string_view>
#include <vector>

// Unicode-aware string helpers shared by every module. All inputs and
// outputs are UTF-8; invalid sequences are replaced with U+FFFD.
namespace credrag::text {

std::string nfc(std::string_view utf8);

/// Full Unicode lowercase mapping (root locale).
std::string lower(std::string_view utf8);

bool is_nfc(std::string_view utf8);

/// Collapses runs of Unicode whitespace to one ASCII space and trims.
std::string collapse_whitespace(std::string_view utf8);

std::string trim(std::string_view s);

/// Lowercased terms split at whitespace and ASCII punctuation.
std::vector<std::string> tokenize(std::string_view utf8);

std::vector<std::string> split(std::string_view s, char sep);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Replaces every `{key}` occurrence; unknown placeholders are left verbatim.
std::string substitute(std::string_view format,
                       const std::vector<std::pair<std::string, std::string>>& values);

bool contains_placeholder(std::string_view format, std::string_view key);

}  // namespace credrag::text
