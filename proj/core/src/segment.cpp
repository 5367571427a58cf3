#include "credrag/segment.hpp"

#include "credrag/error.hpp"
#include "credrag/text.hpp"

namespace credrag::credibility {

std::vector<RetrievalUnit> segment(const Document& document, Granularity granularity) {
    std::vector<RetrievalUnit> units;
    if (granularity == Granularity::DocumentLevel) {
        units.push_back({document.id, 0, document.text, 0.0, std::nullopt});
        return units;
    }

    const std::string normalized = text::collapse_whitespace(document.text);
    auto emit = [&](std::string_view fragment) {
        std::string t = text::trim(fragment);
        if (t.empty()) return;
        units.push_back({document.id, static_cast<int>(units.size()), std::move(t), 0.0, std::nullopt});
    };

    std::size_t start = 0;
    for (std::size_t i = 0; i + 1 < normalized.size(); ++i) {
        char c = normalized[i];
        if ((c == '.' || c == '!' || c == '?') && normalized[i + 1] == ' ') {
            emit(std::string_view(normalized).substr(start, i + 1 - start));
            start = i + 2;
        }
    }
    if (start < normalized.size()) emit(std::string_view(normalized).substr(start));
    return units;
}

std::vector<RetrievalUnit> annotate_units(std::vector<RetrievalUnit> units, std::string_view query,
                                          const RelevanceScorer& scorer, const CredibilityPolicy& policy) {
    if (units.empty()) throw PreconditionError("annotate_units needs at least one unit");
    std::vector<double> scores;
    scores.reserve(units.size());
    for (auto& u : units) {
        u.relevance_score = scorer.score(query, u.text);
        scores.push_back(u.relevance_score);
    }
    auto levels = bucket(scores, policy);
    for (std::size_t i = 0; i < units.size(); ++i) units[i].credibility = levels[i];
    return units;
}

std::vector<RetrievalUnit> annotate_item_units(const QAItem& item, const CredibilityPolicy& policy) {
    std::vector<RetrievalUnit> units;
    std::vector<bool> gold;
    for (const auto& doc : item.documents) {
        auto part = segment(doc, policy.granularity);
        units.insert(units.end(), part.begin(), part.end());
        gold.insert(gold.end(), part.size(), doc.is_gold.value_or(false));
    }
    if (units.empty()) return units;
    std::vector<std::string> corpus;
    corpus.reserve(units.size());
    for (const auto& u : units) corpus.push_back(u.text);
    Bm25Scorer scorer(corpus);

    if (policy.bucketing == Bucketing::GoldLabel) {
        // Units inherit the gold flag of their parent document.
        for (std::size_t i = 0; i < units.size(); ++i) {
            units[i].relevance_score = scorer.score(item.question, units[i].text);
            units[i].credibility = CredibilityLevel(gold[i] ? policy.level_count : 1, policy.level_count);
        }
        return units;
    }
    return annotate_units(std::move(units), item.question, scorer, policy);
}

nlohmann::ordered_json to_json(const RetrievalUnit& unit) {
    nlohmann::ordered_json j;
    j["parent_document_id"] = unit.parent_document_id;
    j["unit_index"] = unit.unit_index;
    j["text"] = unit.text;
    j["relevance_score"] = unit.relevance_score;
    if (unit.credibility) j["credibility"] = unit.credibility->value();
    return j;
}

}  // namespace credrag::credibility
