#pragma once

#include <optional>
#include <string>
#include <vector>

#include "credrag/bm25.hpp"
#include "credrag/credibility.hpp"
#include "credrag/types.hpp"

namespace credrag::credibility {

/// A sentence- or document-sized slice of a retrieved document.
struct RetrievalUnit {
    std::string parent_document_id;
    int unit_index = 0;
    std::string text;
    double relevance_score = 0.0;
    std::optional<CredibilityLevel> credibility;

    friend bool operator==(const RetrievalUnit&, const RetrievalUnit&) = default;
};

/// Sentence splitting is naive: a boundary is `.`, `!` or `?` followed by
/// whitespace. Abbreviations such as "Dr. Smith" split too.
std::vector<RetrievalUnit> segment(const Document& document, Granularity granularity);

/// Scores every unit against `query` and buckets all of them together.
std::vector<RetrievalUnit> annotate_units(std::vector<RetrievalUnit> units, std::string_view query,
                                          const RelevanceScorer& scorer, const CredibilityPolicy& policy);

/// Segments every document of an assessed item at the policy granularity
/// and annotates the units with a BM25 scorer built over those units.
std::vector<RetrievalUnit> annotate_item_units(const QAItem& item, const CredibilityPolicy& policy);

nlohmann::ordered_json to_json(const RetrievalUnit& unit);

}  // namespace credrag::credibility
