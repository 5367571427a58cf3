#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "credrag/types.hpp"

namespace credrag::credibility {

/// Scores how well a text answers a query. Implementations are read-only
/// after construction and may be shared between threads.
class RelevanceScorer {
  public:
    virtual ~RelevanceScorer() = default;
    [[nodiscard]] virtual double score(std::string_view query, std::string_view text) const = 0;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Okapi BM25 with corpus statistics fixed at construction. Uses the
/// non-negative idf form ln(1 + (N - df + 0.5) / (df + 0.5)).
class Bm25Scorer final : public RelevanceScorer {
  public:
    explicit Bm25Scorer(const std::vector<std::string>& corpus, Bm25Params params = {});

    [[nodiscard]] double score(std::string_view query, std::string_view text) const override;
    [[nodiscard]] double idf(const std::string& term) const;
    [[nodiscard]] double average_length() const noexcept { return avg_len_; }

  private:
    Bm25Params params_;
    std::size_t doc_count_ = 0;
    double avg_len_ = 0.0;
    std::unordered_map<std::string, std::size_t> doc_freq_;
};

/// BM25 of `text` against `query` with statistics from `pool`.
double score_relevance(std::string_view query, std::string_view text, const std::vector<std::string>& pool);

/// Fills absent relevance scores with BM25 over the item's own documents.
QAItem fill_missing_relevance(const QAItem& item);

}  // namespace credrag::credibility
