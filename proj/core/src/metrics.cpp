#include "credrag/metrics.hpp"

#include <algorithm>
#include <regex>

#include "credrag/error.hpp"
#include "credrag/text.hpp"

namespace credrag::metrics {

nlohmann::ordered_json to_json(const ScoredItem& s) {
    nlohmann::ordered_json j;
    j["item_id"] = s.item_id;
    j["generation"] = s.generation;
    j["em"] = s.em ? nlohmann::ordered_json(*s.em) : nlohmann::ordered_json(nullptr);
    j["rouge_l"] = s.rouge_l ? nlohmann::ordered_json(*s.rouge_l) : nlohmann::ordered_json(nullptr);
    j["mc_correct"] = s.mc_correct ? nlohmann::ordered_json(*s.mc_correct) : nlohmann::ordered_json(nullptr);
    j["error"] = s.error ? nlohmann::ordered_json(*s.error) : nlohmann::ordered_json(nullptr);
    return j;
}

ScoredItem scored_item_from_json(const nlohmann::json& j) {
    ScoredItem s;
    s.item_id = j.at("item_id").get<std::string>();
    s.generation = j.value("generation", "");
    if (j.contains("em") && !j["em"].is_null()) s.em = j["em"].get<double>();
    if (j.contains("rouge_l") && !j["rouge_l"].is_null()) s.rouge_l = j["rouge_l"].get<double>();
    if (j.contains("mc_correct") && !j["mc_correct"].is_null()) s.mc_correct = j["mc_correct"].get<bool>();
    if (j.contains("error") && !j["error"].is_null()) s.error = j["error"].get<std::string>();
    return s;
}

std::string normalize(std::string_view input) {
    std::string s = text::lower(text::nfc(input));
    for (char& c : s) {
        switch (c) {
            case '.': case ',': case ';': case ':': case '!': case '?':
            case '\'': case '"': case '(': case ')': case '[': case ']':
                c = ' ';
                break;
            default: break;
        }
    }
    return text::collapse_whitespace(s);
}

double exact_match(std::string_view generation, const std::vector<std::string>& short_answers) {
    if (short_answers.empty()) throw PreconditionError("exact_match needs at least one short answer");
    const std::string gen = normalize(generation);
    std::size_t hits = 0;
    for (const auto& answer : short_answers) {
        if (gen.find(normalize(answer)) != std::string::npos) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(short_answers.size());
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double rouge_l(std::string_view candidate, std::string_view reference) {
    auto cand = text::split(normalize(candidate), ' ');
    auto ref = text::split(normalize(reference), ' ');
    if (cand.size() == 1 && cand[0].empty()) cand.clear();
    if (ref.size() == 1 && ref[0].empty()) ref.clear();
    if (cand.empty() || ref.empty()) return 0.0;
    const double l = static_cast<double>(lcs_length(cand, ref));
    if (l == 0.0) return 0.0;
    const double p = l / static_cast<double>(cand.size());
    const double r = l / static_cast<double>(ref.size());
    return 2.0 * p * r / (p + r);
}

std::optional<std::string> extract_choice(std::string_view generation,
                                          const std::map<std::string, std::string>& options) {
    static const std::regex kLetter(R"((?:^|[^A-Za-z0-9])([A-Z])(?:[).]|(?=\s|$)))");
    const std::string gen(generation);
    for (auto it = std::sregex_iterator(gen.begin(), gen.end(), kLetter); it != std::sregex_iterator(); ++it) {
        std::string letter = (*it)[1].str();
        if (options.contains(letter)) return letter;
    }

    const std::string norm = normalize(generation);
    std::optional<std::string> best;
    std::size_t best_pos = std::string::npos;
    for (const auto& [letter, option] : options) {
        std::string needle = normalize(option);
        if (needle.empty()) continue;
        auto pos = norm.find(needle);
        if (pos != std::string::npos && pos < best_pos) {
            best_pos = pos;
            best = letter;
        }
    }
    return best;
}

bool mc_accuracy(std::string_view generation, const std::map<std::string, std::string>& options,
                 const std::string& correct_option) {
    auto chosen = extract_choice(generation, options);
    return chosen && *chosen == correct_option;
}

}  // namespace credrag::metrics
