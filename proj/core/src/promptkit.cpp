#include "credrag/promptkit.hpp"

#include <algorithm>
#include <charconv>

#include "credrag/dataset_io.hpp"
#include "credrag/error.hpp"
#include "credrag/text.hpp"

namespace credrag::promptkit {

Strategy Strategy::top_k_similar(int k) {
    if (k < 1) throw ConfigError("top_k_similar needs k >= 1, got " + std::to_string(k));
    return {StrategyKind::TopKSimilar, k};
}

Strategy Strategy::parse(std::string_view s) {
    if (s == "retrieval_based" || s == "retrieval") return retrieval_based();
    if (s == "retrieval_rerank" || s == "rerank") return retrieval_rerank();
    if (s == "retrieval_credibility" || s == "credibility") return retrieval_credibility();
    if (s == "discard_low") return discard_low();
    if (s == "chain_of_thought" || s == "cot") return chain_of_thought();
    for (std::string_view prefix : {"top_k_similar:", "top_k:"}) {
        if (s.starts_with(prefix)) {
            auto digits = s.substr(prefix.size());
            int k = 0;
            auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
            if (ec != std::errc() || p != digits.data() + digits.size()) break;
            return top_k_similar(k);
        }
    }
    throw ConfigError("unknown strategy '" + std::string(s) + "'");
}

std::string Strategy::name() const {
    switch (kind) {
        case StrategyKind::RetrievalBased: return "retrieval_based";
        case StrategyKind::RetrievalRerank: return "retrieval_rerank";
        case StrategyKind::RetrievalCredibility: return "retrieval_credibility";
        case StrategyKind::DiscardLow: return "discard_low";
        case StrategyKind::TopKSimilar: return "top_k_similar:" + std::to_string(k);
        case StrategyKind::ChainOfThought: return "chain_of_thought";
    }
    return "unknown";
}

bool Strategy::reads_credibility() const {
    return kind == StrategyKind::RetrievalCredibility || kind == StrategyKind::DiscardLow ||
           kind == StrategyKind::ChainOfThought;
}

bool Strategy::reads_scores() const {
    return kind == StrategyKind::RetrievalRerank || kind == StrategyKind::TopKSimilar;
}

std::vector<Strategy> all_strategies(int k) {
    return {Strategy::retrieval_based(),   Strategy::retrieval_rerank(), Strategy::retrieval_credibility(),
            Strategy::discard_low(),       Strategy::top_k_similar(k),   Strategy::chain_of_thought()};
}

void PromptTemplate::validate() const {
    auto require = [&](const std::string& fmt, std::string_view field, std::string_view key) {
        if (!text::contains_placeholder(fmt, key)) {
            throw ConfigError("template '" + name + "' field " + std::string(field) + " lacks {" + std::string(key) + "}");
        }
    };
    require(doc_line_format, "doc_line", "credibility_label");
    require(doc_line_format, "doc_line", "text");
    require(numeric_doc_line_format, "numeric_doc_line", "level");
    require(numeric_doc_line_format, "numeric_doc_line", "text");
    require(plain_doc_line_format, "plain_doc_line", "text");
    require(question_line_format, "question_line", "question");
    require(date_suffix_format, "date_suffix", "query_date");
    require(option_line_format, "option_line", "letter");
    require(option_line_format, "option_line", "text");
    require(answer_line_format, "answer_line", "answer");
}

const PromptTemplate& TemplateSet::for_strategy(const Strategy& s) const {
    if (s.kind == StrategyKind::ChainOfThought) return chain_of_thought;
    return s.reads_credibility() ? credibility : plain;
}

TemplateSet builtin_templates() {
    PromptTemplate base;
    base.version = "1";
    base.doc_line_format = "{credibility_label} credibility of text: {text}";
    base.numeric_doc_line_format = "Credibility {level} of text: {text}";
    base.plain_doc_line_format = "Text: {text}";
    base.question_line_format = "Question: {question}";
    base.date_suffix_format = " date:{query_date}";
    base.option_line_format = "{letter}){text}";
    base.docs_header = "Docs:";
    base.answer_line_format = "Answer: {answer}";
    base.shot_separator = "\n\n";

    TemplateSet set{base, base, base};
    set.plain.name = "plain";
    set.plain.preamble = "Answer the question based on the given documents. Respond with a short answer.";
    set.credibility.name = "credibility";
    set.credibility.preamble =
        "Answer the question based on the given documents. Each document is labeled with its credibility. "
        "Rely on documents with high credibility and treat documents with low credibility with caution. "
        "Respond with a short answer.";
    set.chain_of_thought.name = "chain_of_thought";
    set.chain_of_thought.preamble =
        "Answer the question based on the given documents. Each document is labeled with its credibility. "
        "First explain which documents are credible and what they state, then give the answer.";
    return set;
}

FewShotBank::FewShotBank(std::vector<QAItem> shots) : shots_(std::move(shots)) {
    for (const auto& shot : shots_) {
        if (!shot.is_evaluable() && !shot.explanation) {
            throw SchemaError("shot '" + shot.id + "' has neither an answer nor an explanation");
        }
        for (const auto& doc : shot.documents) {
            if (!doc.credibility || !doc.relevance_score) {
                throw SchemaError("shot '" + shot.id + "' document '" + doc.id +
                                  "' needs both credibility and relevance_score");
            }
        }
    }
}

FewShotBank FewShotBank::load(const std::filesystem::path& path, int level_count) {
    LoadOptions opts;
    opts.level_count = level_count;
    opts.allow_empty = true;
    return FewShotBank(load_dataset(path, opts).items);
}

FewShotBank FewShotBank::first(std::size_t n) const {
    FewShotBank out;
    out.shots_.assign(shots_.begin(), shots_.begin() + static_cast<std::ptrdiff_t>(std::min(n, shots_.size())));
    return out;
}

namespace {

void require_scores(const std::vector<Document>& documents) {
    for (const auto& d : documents) {
        if (!d.relevance_score) throw PreconditionError("document '" + d.id + "' has no relevance_score");
    }
}

void require_credibility(const std::vector<Document>& documents) {
    for (const auto& d : documents) {
        if (!d.credibility) throw PreconditionError("document '" + d.id + "' has no credibility");
    }
}

}  // namespace

std::vector<Document> rerank(const std::vector<Document>& documents) {
    require_scores(documents);
    std::vector<Document> out = documents;
    std::stable_sort(out.begin(), out.end(),
                     [](const Document& a, const Document& b) { return *a.relevance_score > *b.relevance_score; });
    return out;
}

std::vector<Document> discard_low(const std::vector<Document>& documents) {
    require_credibility(documents);
    std::vector<Document> out;
    std::copy_if(documents.begin(), documents.end(), std::back_inserter(out),
                 [](const Document& d) { return d.credibility->value() > 1; });
    return out;
}

std::vector<Document> top_k(const std::vector<Document>& documents, int k) {
    if (k < 1) throw PreconditionError("top_k needs k >= 1");
    std::vector<Document> out = rerank(documents);
    if (out.size() > static_cast<std::size_t>(k)) out.resize(static_cast<std::size_t>(k));
    return out;
}

std::vector<Document> order_by_credibility(const std::vector<Document>& documents) {
    require_credibility(documents);
    std::vector<Document> out = documents;
    std::stable_sort(out.begin(), out.end(), [](const Document& a, const Document& b) {
        return a.credibility->value() > b.credibility->value();
    });
    return out;
}

std::vector<Document> prepare_documents(const Strategy& strategy, const std::vector<Document>& documents) {
    switch (strategy.kind) {
        case StrategyKind::RetrievalBased: return documents;
        case StrategyKind::RetrievalRerank: return rerank(documents);
        case StrategyKind::RetrievalCredibility: return order_by_credibility(documents);
        case StrategyKind::DiscardLow: return order_by_credibility(discard_low(documents));
        case StrategyKind::TopKSimilar: return top_k(documents, strategy.k);
        case StrategyKind::ChainOfThought: require_credibility(documents); return documents;
    }
    return documents;
}

std::string render_document_line(const Strategy& strategy, const Document& doc, const PromptTemplate& tmpl) {
    if (!strategy.reads_credibility()) return text::substitute(tmpl.plain_doc_line_format, {{"text", doc.text}});
    if (!doc.credibility) throw PreconditionError("document '" + doc.id + "' has no credibility");
    const auto& level = *doc.credibility;
    if (level.level_count() == 3) {
        return text::substitute(tmpl.doc_line_format, {{"credibility_label", level.label()}, {"text", doc.text}});
    }
    return text::substitute(tmpl.numeric_doc_line_format,
                            {{"level", std::to_string(level.value())}, {"text", doc.text}});
}

std::string render_item_block(const Strategy& strategy, const QAItem& item, const PromptTemplate& tmpl) {
    std::string out = text::substitute(tmpl.question_line_format, {{"question", item.question}});
    if (item.query_date) {
        out += text::substitute(tmpl.date_suffix_format, {{"query_date", item.query_date->to_string()}});
    }
    for (const auto& [letter, option] : item.options) {
        out += '\n';
        out += text::substitute(tmpl.option_line_format, {{"letter", letter}, {"text", option}});
    }
    auto docs = prepare_documents(strategy, item.documents);
    if (!docs.empty()) {
        if (!tmpl.docs_header.empty()) {
            out += '\n';
            out += tmpl.docs_header;
        }
        for (const auto& doc : docs) {
            out += '\n';
            out += render_document_line(strategy, doc, tmpl);
        }
    }
    return out;
}

std::string render_answer_block(const QAItem& item, bool with_explanation, const PromptTemplate& tmpl) {
    if (with_explanation && item.explanation && !item.explanation->empty()) return *item.explanation;
    std::string answer;
    if (!item.answers.empty()) {
        answer = text::join(item.answers, "; ");
    } else {
        answer = item.golden_answer();
    }
    if (answer.empty()) throw PreconditionError("item '" + item.id + "' has no answer or explanation to render");
    return text::substitute(tmpl.answer_line_format, {{"answer", answer}});
}

std::string assemble(const Strategy& strategy, const QAItem& item, const FewShotBank& shots,
                     const PromptTemplate& tmpl) {
    std::vector<std::string> blocks;
    blocks.reserve(shots.size() + 2);
    if (!tmpl.preamble.empty()) blocks.push_back(tmpl.preamble);
    const bool explain = strategy.kind == StrategyKind::ChainOfThought;
    for (const auto& shot : shots.shots()) {
        blocks.push_back(render_item_block(strategy, shot, tmpl) + "\n" + render_answer_block(shot, explain, tmpl));
    }
    blocks.push_back(render_item_block(strategy, item, tmpl));
    return text::join(blocks, tmpl.shot_separator);
}

}  // namespace credrag::promptkit
