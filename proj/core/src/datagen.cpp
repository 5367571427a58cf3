#include "credrag/datagen.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>

#include <spdlog/spdlog.h>

#include "credrag/bm25.hpp"
#include "credrag/dataset_io.hpp"
#include "credrag/metrics.hpp"
#include "credrag/promptkit.hpp"
#include "credrag/text.hpp"

namespace credrag::datagen {

GenerationTemplates builtin_generation_templates() {
    GenerationTemplates t;
    t.explanation =
        "Below are a question, documents labeled with their credibility, and the correct answer. "
        "Write an explanation that states which documents are credible, what they say, and how they lead to "
        "the correct answer. End the explanation with the correct answer.\n\n"
        "{context}\nCorrect answer: {answer}\nExplanation:";
    t.instruction = promptkit::builtin_templates().chain_of_thought.preamble;
    t.fake_claim =
        "Write one declarative sentence that states the following answer to the question as an established "
        "fact.\nQuestion: {question}\nAnswer: {wrong_option}\nClaim:";
    t.fake_news_news =
        "Write a news article of several sentences that reports the following claim as fact.\n"
        "Claim: {claim}\nArticle:";
    t.fake_news_twitter = "Write a short Twitter post that spreads the following claim.\nClaim: {claim}\nPost:";
    t.validity_period =
        "How long does the answer to the following question remain valid before newer events may change it? "
        "Choose one of {choices} days and reply with the number only.\nQuestion: {question}\nValidity period:";
    return t;
}

TextGenerator::TextGenerator(gateway::Gateway& gateway, gateway::ResponseCache* cache, double temperature,
                             int max_tokens)
    : gateway_(gateway), cache_(cache), temperature_(temperature), max_tokens_(max_tokens) {}

std::string TextGenerator::generate(const std::string& prompt, std::int64_t seed) {
    gateway::GenerationRequest req;
    req.backend_id = gateway_.config().id;
    req.model = gateway_.config().model;
    req.prompt = prompt;
    req.temperature = temperature_;
    req.max_tokens = max_tokens_;
    req.seed = seed;
    if (cache_) return gateway::cached_complete(req, gateway_, *cache_).text;
    return gateway_.complete(req).text;
}

namespace {

bool contains_normalized(std::string_view haystack, std::string_view needle) {
    std::string n = metrics::normalize(needle);
    return !n.empty() && metrics::normalize(haystack).find(n) != std::string::npos;
}

/// Option text for multiple choice, first short answer otherwise.
std::string containment_answer(const QAItem& item) {
    if (!item.answers.empty()) return item.answers.front();
    if (item.correct_option) {
        auto it = item.options.find(*item.correct_option);
        if (it != item.options.end()) return it->second;
    }
    return {};
}

std::string render_context(const QAItem& item) {
    return promptkit::render_item_block(promptkit::Strategy::chain_of_thought(), item,
                                        promptkit::builtin_templates().chain_of_thought);
}

std::string first_line(const std::string& s) {
    for (const auto& line : text::split(s, '\n')) {
        auto t = text::trim(line);
        if (!t.empty()) return t;
    }
    return {};
}

}  // namespace

ExplanationResult generate_explanation(TextGenerator& generator, const QAItem& item, const std::string& golden_answer,
                                       const GenerationTemplates& templates) {
    if (golden_answer.empty()) throw PreconditionError("golden answer is empty");
    for (const auto& d : item.documents) {
        if (!d.credibility) throw PreconditionError("document '" + d.id + "' has no credibility");
    }
    const std::string prompt =
        text::substitute(templates.explanation, {{"context", render_context(item)}, {"answer", golden_answer}});
    ExplanationResult result;
    for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
        result.attempts = attempt + 1;
        std::string out = text::trim(generator.generate(prompt, attempt));
        if (contains_normalized(out, golden_answer)) {
            result.explanation = std::move(out);
            return result;
        }
    }
    return result;
}

nlohmann::ordered_json to_json(const TrainingExample& e) {
    nlohmann::ordered_json j;
    j["instruction"] = e.instruction;
    j["input"] = e.input;
    j["output"] = e.target;
    j["meta"] = {{"dataset", e.provenance.dataset},
                 {"item_id", e.provenance.item_id},
                 {"generator", e.provenance.generator}};
    return j;
}

TrainingExample training_example_from_json(const nlohmann::json& j, int level_count) {
    TrainingExample e;
    try {
        e.instruction = j.at("instruction").get<std::string>();
        e.input = j.at("input").get<std::string>();
        e.target = j.at("output").get<std::string>();
        const auto& meta = j.at("meta");
        e.provenance = {meta.at("dataset").get<std::string>(), meta.at("item_id").get<std::string>(),
                        meta.at("generator").get<std::string>()};
    } catch (const nlohmann::json::exception& ex) {
        throw SchemaError(std::string("malformed training record: ") + ex.what());
    }
    std::string question = text::split(e.input, '\n').front();
    if (question.starts_with("Question: ")) question.erase(0, 10);
    if (auto pos = question.rfind(" date:"); pos != std::string::npos && question.size() - pos == 16) {
        question.erase(pos);
    }
    e.question = question;
    for (const auto& d : gateway::parse_prompt_documents(e.input)) {
        if (!d.level) throw SchemaError("training input has a document line without credibility");
        e.annotated_documents.emplace_back(CredibilityLevel(*d.level, level_count), d.text);
    }
    return e;
}

void write_training_jsonl(const std::vector<TrainingExample>& examples, const std::filesystem::path& path) {
    std::string out;
    for (const auto& e : examples) {
        out += to_json(e).dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

std::vector<TrainingExample> load_training_jsonl(const std::filesystem::path& path, int level_count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<TrainingExample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            out.push_back(training_example_from_json(nlohmann::json::parse(line), level_count));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), lineno);
        } catch (const SchemaError& e) {
            throw SchemaError(e.what(), lineno);
        }
    }
    return out;
}

CorpusResult build_training_corpus(const Dataset& dataset, const credibility::CredibilityPolicy& policy,
                                   TextGenerator& generator, const CorpusOptions& options) {
    policy.validate();
    std::vector<const QAItem*> items;
    for (const auto& item : dataset.items) items.push_back(&item);
    std::sort(items.begin(), items.end(), [](const QAItem* a, const QAItem* b) { return a->id < b->id; });

    struct Slot {
        std::optional<TrainingExample> example;
        std::optional<Rejection> rejection;
    };
    std::vector<Slot> slots(items.size());

    auto process = [&](std::size_t i) {
        const QAItem& item = *items[i];
        Slot& slot = slots[i];
        try {
            std::string golden = containment_answer(item);
            if (golden.empty()) {
                slot.rejection = Rejection{item.id, "item has no golden answer"};
                return;
            }
            QAItem prepared = item;
            if (policy.bucketing != credibility::Bucketing::GoldLabel) {
                prepared = credibility::fill_missing_relevance(prepared);
            }
            prepared = credibility::assess(prepared, policy);
            auto result = generate_explanation(generator, prepared, golden, options.templates);
            if (result.rejected()) {
                slot.rejection = Rejection{item.id, "explanation omitted the golden answer in " +
                                                        std::to_string(result.attempts) + " attempts"};
                return;
            }
            TrainingExample ex;
            ex.question = prepared.question;
            for (const auto& d : prepared.documents) ex.annotated_documents.emplace_back(*d.credibility, d.text);
            ex.instruction = options.templates.instruction;
            ex.input = render_context(prepared);
            ex.target = *result.explanation;
            ex.provenance = {dataset.name, item.id, generator.model()};
            slot.example = std::move(ex);
        } catch (const std::exception& e) {
            slot.rejection = Rejection{item.id, e.what()};
        }
    };

    const std::size_t workers = static_cast<std::size_t>(std::max(options.workers, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < items.size(); ++i) process(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < items.size();) process(i);
            });
        }
    }

    CorpusResult out;
    for (auto& slot : slots) {
        if (slot.example) out.examples.push_back(std::move(*slot.example));
        if (slot.rejection) {
            spdlog::info("skipping item '{}': {}", slot.rejection->item_id, slot.rejection->reason);
            out.rejections.push_back(std::move(*slot.rejection));
        }
    }
    return out;
}

std::string generate_fake_claim(TextGenerator& generator, const std::string& question, const std::string& wrong_option,
                                const GenerationTemplates& templates) {
    if (text::trim(question).empty()) throw PreconditionError("question is empty");
    if (text::trim(wrong_option).empty()) throw PreconditionError("wrong option is empty");
    const std::string prompt =
        text::substitute(templates.fake_claim, {{"question", question}, {"wrong_option", wrong_option}});
    for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
        std::string claim = first_line(generator.generate(prompt, attempt));
        if (contains_normalized(claim, wrong_option)) return claim;
    }
    throw ValidationError("no generated claim asserted '" + wrong_option + "' after " +
                          std::to_string(kMaxGenerationAttempts) + " attempts");
}

Document generate_fake_news(TextGenerator& generator, const std::string& claim, NewsStyle style,
                            const std::string& document_id, std::int64_t seed, int level_count,
                            const GenerationTemplates& templates) {
    if (text::trim(claim).empty()) throw PreconditionError("claim is empty");
    const std::string& tmpl = style == NewsStyle::News ? templates.fake_news_news : templates.fake_news_twitter;
    std::string body = text::trim(generator.generate(text::substitute(tmpl, {{"claim", claim}}), seed));
    if (body.empty()) throw ValidationError("backend returned empty " + to_string(style) + " text");
    Document doc;
    doc.id = document_id;
    doc.text = text::nfc(body);
    doc.source = kFabricatedSource;
    doc.source_reliability = CredibilityLevel(1, level_count);
    doc.is_noise = true;
    doc.extra["style"] = to_string(style);
    return doc;
}

std::optional<int> parse_validity_choice(std::string_view response) {
    std::size_t i = 0;
    while (i < response.size()) {
        if (response[i] < '0' || response[i] > '9') {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < response.size() && response[j] >= '0' && response[j] <= '9') ++j;
        int v = 0;
        auto [p, ec] = std::from_chars(response.data() + i, response.data() + j, v);
        if (ec == std::errc()) {
            for (int c : kValidityChoices) {
                if (c == v) return v;
            }
        }
        i = j;
    }
    return std::nullopt;
}

int estimate_validity_period(TextGenerator& generator, const std::string& question, int trials,
                             const GenerationTemplates& templates) {
    if (trials < 1 || trials % 2 == 0) throw PreconditionError("trials must be a positive odd number");
    std::vector<std::string> choices;
    for (int c : kValidityChoices) choices.push_back(std::to_string(c));
    const std::string prompt = text::substitute(
        templates.validity_period, {{"question", question}, {"choices", text::join(choices, ", ")}});

    std::map<int, int> votes;
    for (int t = 0; t < trials; ++t) {
        if (auto v = parse_validity_choice(generator.generate(prompt, t))) ++votes[*v];
    }
    if (votes.empty()) throw ValidationError("no trial produced a recognizable validity period");
    // std::map iterates ascending, so the first maximum is the shorter period.
    int best = votes.begin()->first;
    int best_votes = 0;
    for (const auto& [period, n] : votes) {
        if (n > best_votes) {
            best = period;
            best_votes = n;
        }
    }
    return best;
}

int pollution_total(double ratio, std::size_t relevant, const std::optional<int>& fixed_total) {
    if (fixed_total) return *fixed_total;
    double total = static_cast<double>(std::max<std::size_t>(relevant, 1)) / (1.0 - ratio);
    return std::max(1, static_cast<int>(std::floor(total + 0.5 + 1e-9)));
}

QAItem pollute_item(const QAItem& item, double ratio, const PolluteOptions& options) {
    std::vector<Document> relevant, noise;
    for (const auto& d : item.documents) (d.is_noise.value_or(false) ? noise : relevant).push_back(d);

    PollutionSpec spec;
    spec.noise_ratio = ratio;
    spec.total_documents = pollution_total(ratio, relevant.size(), options.total_documents);
    spec.styles = options.styles;
    spec.seed = derive_seed(options.seed, item.id, ratio);
    spec.placement = options.placement;
    spec.validate();

    const int needed = noise_count(ratio, spec.total_documents);
    if (static_cast<int>(noise.size()) < needed && options.generator && item.is_multiple_choice() &&
        !options.styles.empty()) {
        std::vector<std::string> wrong;
        for (const auto& [letter, option] : item.options) {
            if (letter != *item.correct_option) wrong.push_back(option);
        }
        if (!wrong.empty()) {
            SeededRng rng(spec.seed ^ 0x5eedULL);
            const auto& pick = wrong[static_cast<std::size_t>(rng.below(wrong.size()))];
            std::string claim = generate_fake_claim(*options.generator, item.question, pick, options.templates);
            for (int k = 0; static_cast<int>(noise.size()) < needed; ++k) {
                NewsStyle style = options.styles[static_cast<std::size_t>(k) % options.styles.size()];
                noise.push_back(generate_fake_news(*options.generator, claim, style,
                                                   item.id + "-fake-" + std::to_string(k), k, options.level_count,
                                                   options.templates));
            }
        }
    }

    QAItem mixed = item;
    try {
        mixed.documents = mix_noise(relevant, noise, spec);
    } catch (const PreconditionError& e) {
        throw PreconditionError("item '" + item.id + "': " + e.what());
    }
    return mixed;
}

Dataset pollute_dataset(const Dataset& dataset, double ratio, const PolluteOptions& options) {
    Dataset out;
    out.name = dataset.name;
    out.metadata = dataset.metadata;

    std::size_t noise_docs = 0;
    std::size_t total_docs = 0;
    std::size_t fabricated = 0;
    for (const auto& item : dataset.items) {
        QAItem mixed = pollute_item(item, ratio, options);
        for (const auto& d : mixed.documents) {
            noise_docs += d.is_noise.value_or(false) ? 1 : 0;
            fabricated += d.source == kFabricatedSource ? 1 : 0;
        }
        total_docs += mixed.documents.size();
        out.items.push_back(std::move(mixed));
    }

    nlohmann::json styles = nlohmann::json::array();
    for (auto s : options.styles) styles.push_back(to_string(s));
    out.metadata["pollution"] = {
        {"noise_ratio", ratio},
        {"seed", options.seed},
        {"styles", styles},
        {"placement", options.placement == Placement::Shuffle ? "shuffle" : "noise_first"},
        {"total_documents", options.total_documents ? nlohmann::json(*options.total_documents) : nlohmann::json()},
        {"realized_noise_documents", noise_docs},
        {"realized_total_documents", total_docs},
        {"realized_noise_ratio", total_docs ? static_cast<double>(noise_docs) / static_cast<double>(total_docs) : 0.0},
        {"fabricated_documents", fabricated},
    };
    return out;
}

}  // namespace credrag::datagen
