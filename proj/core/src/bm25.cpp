#include "credrag/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "credrag/text.hpp"

namespace credrag::credibility {

Bm25Scorer::Bm25Scorer(const std::vector<std::string>& corpus, Bm25Params params) : params_(params) {
    doc_count_ = corpus.size();
    std::size_t total = 0;
    for (const auto& doc : corpus) {
        auto terms = text::tokenize(doc);
        total += terms.size();
        std::set<std::string> unique(terms.begin(), terms.end());
        for (const auto& t : unique) ++doc_freq_[t];
    }
    avg_len_ = doc_count_ ? static_cast<double>(total) / static_cast<double>(doc_count_) : 0.0;
}

double Bm25Scorer::idf(const std::string& term) const {
    auto it = doc_freq_.find(term);
    double df = it == doc_freq_.end() ? 0.0 : static_cast<double>(it->second);
    double n = static_cast<double>(doc_count_);
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Scorer::score(std::string_view query, std::string_view text) const {
    auto doc_terms = text::tokenize(text);
    if (doc_terms.empty()) return 0.0;
    std::unordered_map<std::string, std::size_t> tf;
    for (const auto& t : doc_terms) ++tf[t];

    auto query_terms = text::tokenize(query);
    std::set<std::string> unique(query_terms.begin(), query_terms.end());

    const double len = static_cast<double>(doc_terms.size());
    const double avg = avg_len_ > 0.0 ? avg_len_ : len;
    double total = 0.0;
    for (const auto& term : unique) {
        auto it = tf.find(term);
        if (it == tf.end()) continue;
        double f = static_cast<double>(it->second);
        double norm = params_.k1 * (1.0 - params_.b + params_.b * len / avg);
        total += idf(term) * f * (params_.k1 + 1.0) / (f + norm);
    }
    return total;
}

double score_relevance(std::string_view query, std::string_view text, const std::vector<std::string>& pool) {
    return Bm25Scorer(pool).score(query, text);
}

QAItem fill_missing_relevance(const QAItem& item) {
    QAItem out = item;
    bool missing = std::any_of(out.documents.begin(), out.documents.end(),
                               [](const Document& d) { return !d.relevance_score; });
    if (!missing) return out;
    std::vector<std::string> pool;
    pool.reserve(out.documents.size());
    for (const auto& d : out.documents) pool.push_back(d.text);
    Bm25Scorer scorer(pool);
    for (auto& d : out.documents) {
        if (!d.relevance_score) d.relevance_score = scorer.score(item.question, d.text);
    }
    return out;
}

}  // namespace credrag::credibility
