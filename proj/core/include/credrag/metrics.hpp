#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace credrag::metrics {

struct ScoredItem {
    std::string item_id;
    std::string generation;
    std::optional<double> em;
    std::optional<double> rouge_l;
    std::optional<bool> mc_correct;
    /// Set when the item could not be evaluated; such items carry no scores.
    std::optional<std::string> error;

    friend bool operator==(const ScoredItem&, const ScoredItem&) = default;
};

nlohmann::ordered_json to_json(const ScoredItem& s);
ScoredItem scored_item_from_json(const nlohmann::json& j);

/// NFC, lowercase, the characters .,;:!?'"()[] replaced by spaces,
/// whitespace collapsed and trimmed.
std::string normalize(std::string_view text);

/// Fraction of short answers that occur, normalized, inside the
/// normalized generation. Throws PreconditionError on an empty list.
double exact_match(std::string_view generation, const std::vector<std::string>& short_answers);

/// Length of the longest common subsequence of two token lists.
std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// LCS-based F1 over normalized whitespace tokens.
double rouge_l(std::string_view candidate, std::string_view reference);

/// Option letter a generation commits to, if any: first a standalone
/// option letter followed by ')' or '.' or a token end, else the option
/// whose normalized text occurs earliest.
std::optional<std::string> extract_choice(std::string_view generation,
                                          const std::map<std::string, std::string>& options);

bool mc_accuracy(std::string_view generation, const std::map<std::string, std::string>& options,
                 const std::string& correct_option);

}  // namespace credrag::metrics
