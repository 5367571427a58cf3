#include "credrag/types.hpp"

#include <charconv>
#include <cstdio>
#include <set>

#include "credrag/error.hpp"

namespace credrag {

Date::Date(std::chrono::year_month_day ymd) : ymd_(ymd) {
    if (!ymd_.ok()) throw ParseError("invalid calendar date");
}

Date Date::parse(std::string_view s) {
    auto fail = [&] { return ParseError("invalid date '" + std::string(s) + "'"); };
    if (s.size() != 10) throw fail();
    char sep = s[4];
    if ((sep != '-' && sep != '/') || s[7] != sep) throw fail();
    auto num = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
        if (ec != std::errc() || p != s.data() + pos + len) throw fail();
        return v;
    };
    int y = num(0, 4);
    int m = num(5, 2);
    int d = num(8, 2);
    std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(m)),
                                    std::chrono::day(static_cast<unsigned>(d))};
    if (!ymd.ok()) throw fail();
    return Date(ymd);
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd_.year()),
                  static_cast<unsigned>(ymd_.month()), static_cast<unsigned>(ymd_.day()));
    return buf;
}

CredibilityLevel::CredibilityLevel(int value, int level_count) : value_(value), level_count_(level_count) {
    if (level_count < 2) {
        throw PreconditionError("level_count must be >= 2, got " + std::to_string(level_count));
    }
    if (value < 1 || value > level_count) {
        throw PreconditionError("credibility level " + std::to_string(value) + " outside [1, " +
                                std::to_string(level_count) + "]");
    }
}

std::string CredibilityLevel::label() const {
    if (level_count_ == 3) {
        static constexpr const char* kNames[] = {"Low", "Medium", "High"};
        return kNames[value_ - 1];
    }
    return std::to_string(value_);
}

std::string QAItem::golden_answer() const {
    if (!answers.empty()) return answers.front();
    if (correct_option) {
        auto it = options.find(*correct_option);
        if (it != options.end()) return *correct_option + ")" + it->second;
    }
    return {};
}

std::size_t Dataset::document_count() const {
    std::size_t n = 0;
    for (const auto& item : items) n += item.documents.size();
    return n;
}

void validate_document(const Document& doc) {
    if (doc.id.empty()) throw SchemaError("document id is empty");
    if (doc.text.empty()) throw SchemaError("document '" + doc.id + "' has empty text");
}

void validate_item(const QAItem& item) {
    if (item.id.empty()) throw SchemaError("item id is empty");
    if (item.question.empty()) throw SchemaError("item '" + item.id + "' has empty question");
    if (item.correct_option) {
        if (item.options.empty()) {
            throw SchemaError("item '" + item.id + "' has correct_option but no options");
        }
        if (!item.options.contains(*item.correct_option)) {
            throw SchemaError("item '" + item.id + "' correct_option '" + *item.correct_option +
                              "' is not an option key");
        }
        if (!item.answers.empty()) {
            throw SchemaError("item '" + item.id + "' has both answers and correct_option");
        }
    }
    std::set<std::string> ids;
    for (const auto& doc : item.documents) {
        validate_document(doc);
        if (!ids.insert(doc.id).second) {
            throw SchemaError("item '" + item.id + "' has duplicate document id '" + doc.id + "'");
        }
    }
}

}  // namespace credrag
