#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "credrag/types.hpp"

namespace credrag::promptkit {

enum class StrategyKind {
    RetrievalBased,
    RetrievalRerank,
    RetrievalCredibility,
    DiscardLow,
    TopKSimilar,
    ChainOfThought,
};

/// How retrieved documents are filtered, ordered and labeled in a prompt.
struct Strategy {
    StrategyKind kind = StrategyKind::RetrievalBased;
    /// Only meaningful for TopKSimilar; always >= 1 there.
    int k = 0;

    static Strategy retrieval_based() { return {StrategyKind::RetrievalBased, 0}; }
    static Strategy retrieval_rerank() { return {StrategyKind::RetrievalRerank, 0}; }
    static Strategy retrieval_credibility() { return {StrategyKind::RetrievalCredibility, 0}; }
    static Strategy discard_low() { return {StrategyKind::DiscardLow, 0}; }
    static Strategy top_k_similar(int k);
    static Strategy chain_of_thought() { return {StrategyKind::ChainOfThought, 0}; }

    /// Accepts the names produced by name(), e.g. "top_k_similar:2".
    static Strategy parse(std::string_view s);
    [[nodiscard]] std::string name() const;

    /// True when document lines carry credibility labels.
    [[nodiscard]] bool reads_credibility() const;
    [[nodiscard]] bool reads_scores() const;

    friend bool operator==(const Strategy&, const Strategy&) = default;
};

/// Every strategy in canonical order; TopKSimilar uses `k`.
std::vector<Strategy> all_strategies(int k = 2);

/// Text skeleton of a prompt. Formats use {placeholder} syntax.
struct PromptTemplate {
    std::string name;
    std::string version;
    std::string preamble;
    /// {credibility_label} and {text}; used on the three-level scale.
    std::string doc_line_format;
    /// {level} and {text}; used on any other scale.
    std::string numeric_doc_line_format;
    /// {text}; used when the strategy hides credibility.
    std::string plain_doc_line_format;
    /// {question}
    std::string question_line_format;
    /// {query_date}; appended to the question line when the item has a date.
    std::string date_suffix_format;
    /// {letter} and {text}
    std::string option_line_format;
    std::string docs_header;
    /// {answer}
    std::string answer_line_format;
    std::string shot_separator;

    /// Throws ConfigError when a required placeholder is missing.
    void validate() const;

    friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;
};

/// Templates per strategy family.
struct TemplateSet {
    PromptTemplate plain;
    PromptTemplate credibility;
    PromptTemplate chain_of_thought;

    [[nodiscard]] const PromptTemplate& for_strategy(const Strategy& s) const;

    friend bool operator==(const TemplateSet&, const TemplateSet&) = default;
};

TemplateSet builtin_templates();

/// Reads one template directory: template.json (name, version) plus one
/// text file per field. A single trailing newline is stripped from each
/// file; absent files keep the built-in value.
PromptTemplate load_template(const std::filesystem::path& dir, const PromptTemplate& fallback);

/// Expects subdirectories plain/, credibility/ and chain_of_thought/.
TemplateSet load_template_set(const std::filesystem::path& root);

/// Writes the directory layout load_template_set reads.
void save_template_set(const TemplateSet& set, const std::filesystem::path& root);

/// Worked examples prepended to every prompt.
class FewShotBank {
  public:
    FewShotBank() = default;
    /// Throws SchemaError when a shot could not render under every strategy.
    explicit FewShotBank(std::vector<QAItem> shots);

    static FewShotBank load(const std::filesystem::path& path, int level_count = CredibilityLevel::kDefaultLevelCount);

    [[nodiscard]] const std::vector<QAItem>& shots() const noexcept { return shots_; }
    [[nodiscard]] std::size_t size() const noexcept { return shots_.size(); }
    [[nodiscard]] FewShotBank first(std::size_t n) const;

  private:
    std::vector<QAItem> shots_;
};

/// Stable sort by relevance_score, highest first.
std::vector<Document> rerank(const std::vector<Document>& documents);

/// Keeps documents above the lowest level, in input order.
std::vector<Document> discard_low(const std::vector<Document>& documents);

/// The k best-scoring documents, best first.
std::vector<Document> top_k(const std::vector<Document>& documents, int k);

/// Stable sort by credibility, highest first.
std::vector<Document> order_by_credibility(const std::vector<Document>& documents);

/// Filters and orders documents the way `strategy` presents them.
std::vector<Document> prepare_documents(const Strategy& strategy, const std::vector<Document>& documents);

/// One document line, labeled or plain per strategy.
std::string render_document_line(const Strategy& strategy, const Document& doc, const PromptTemplate& tmpl);

/// Question, options and documents of one item; no answer.
std::string render_item_block(const Strategy& strategy, const QAItem& item, const PromptTemplate& tmpl);

/// "Answer: ..." or, with `with_explanation`, the explanation verbatim.
std::string render_answer_block(const QAItem& item, bool with_explanation,
                                const PromptTemplate& tmpl = builtin_templates().plain);

/// Preamble, few-shot blocks and the item block joined by the template's
/// shot separator. Pure: equal inputs give byte-identical prompts.
std::string assemble(const Strategy& strategy, const QAItem& item, const FewShotBank& shots,
                     const PromptTemplate& tmpl);

inline std::string assemble(const Strategy& strategy, const QAItem& item, const FewShotBank& shots,
                            const TemplateSet& templates) {
    return assemble(strategy, item, shots, templates.for_strategy(strategy));
}

}  // namespace credrag::promptkit
