#pragma once

#include <chrono>
#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace credrag {

/// Calendar date without time of day.
class Date {
  public:
    Date() = default;
    explicit Date(std::chrono::year_month_day ymd);

    /// Accepts YYYY-MM-DD or YYYY/MM/DD. Throws ParseError.
    static Date parse(std::string_view s);

    /// Always YYYY-MM-DD.
    [[nodiscard]] std::string to_string() const;
    [[nodiscard]] std::chrono::sys_days days() const { return std::chrono::sys_days(ymd_); }
    [[nodiscard]] std::chrono::year_month_day ymd() const { return ymd_; }

    friend bool operator==(const Date& a, const Date& b) { return a.ymd_ == b.ymd_; }
    friend auto operator<=>(const Date& a, const Date& b) { return a.days() <=> b.days(); }

  private:
    std::chrono::year_month_day ymd_{std::chrono::year(1970), std::chrono::January, std::chrono::day(1)};
};

/// Ordinal credibility in [1, level_count].
class CredibilityLevel {
  public:
    static constexpr int kDefaultLevelCount = 3;

    /// Throws PreconditionError when the pair breaks the range invariant.
    CredibilityLevel(int value, int level_count = kDefaultLevelCount);

    [[nodiscard]] int value() const noexcept { return value_; }
    [[nodiscard]] int level_count() const noexcept { return level_count_; }
    [[nodiscard]] bool is_top() const noexcept { return value_ == level_count_; }

    /// "Low"/"Medium"/"High" on a three-level scale, the decimal value otherwise.
    [[nodiscard]] std::string label() const;

    friend bool operator==(const CredibilityLevel&, const CredibilityLevel&) = default;

  private:
    int value_;
    int level_count_;
};

struct Document {
    std::string id;
    std::string text;
    std::string source;
    std::optional<CredibilityLevel> source_reliability;
    std::optional<Date> published_date;
    std::optional<double> relevance_score;
    std::optional<bool> is_gold;
    std::optional<bool> is_noise;
    std::optional<CredibilityLevel> credibility;
    /// Fields this schema does not know, kept for re-emission.
    nlohmann::json extra = nlohmann::json::object();

    friend bool operator==(const Document&, const Document&) = default;
};

struct QAItem {
    std::string id;
    std::string question;
    std::optional<Date> query_date;
    std::vector<std::string> answers;
    std::map<std::string, std::string> options;
    std::optional<std::string> correct_option;
    /// Reference rationale; used by few-shot banks and chain-of-thought targets.
    std::optional<std::string> explanation;
    std::vector<Document> documents;
    nlohmann::json extra = nlohmann::json::object();

    [[nodiscard]] bool is_multiple_choice() const { return correct_option.has_value(); }
    [[nodiscard]] bool is_evaluable() const { return !answers.empty() || is_multiple_choice(); }

    /// First short answer, or "{letter}){option}" for multiple choice.
    [[nodiscard]] std::string golden_answer() const;

    friend bool operator==(const QAItem&, const QAItem&) = default;
};

struct Dataset {
    std::string name;
    std::vector<QAItem> items;
    nlohmann::json metadata = nlohmann::json::object();

    [[nodiscard]] std::size_t document_count() const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Throws SchemaError describing the first broken invariant.
void validate_document(const Document& doc);
void validate_item(const QAItem& item);

}  // namespace credrag
