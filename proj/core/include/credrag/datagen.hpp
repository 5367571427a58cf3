#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "credrag/credibility.hpp"
#include "credrag/gateway.hpp"
#include "credrag/mix_noise.hpp"
#include "credrag/types.hpp"

namespace credrag::datagen {

/// Prompt texts for corpus and benchmark construction.
struct GenerationTemplates {
    /// {context}, {answer}
    std::string explanation;
    /// Instruction field of every emitted training record.
    std::string instruction;
    /// {question}, {wrong_option}
    std::string fake_claim;
    /// {claim}
    std::string fake_news_news;
    /// {claim}
    std::string fake_news_twitter;
    /// {question}, {choices}
    std::string validity_period;
};

GenerationTemplates builtin_generation_templates();

/// Backend access for generation steps. Each attempt passes its index as
/// the request seed, so retries and voting trials are distinct requests.
class TextGenerator {
  public:
    TextGenerator(gateway::Gateway& gateway, gateway::ResponseCache* cache = nullptr, double temperature = 0.01,
                  int max_tokens = 512);

    std::string generate(const std::string& prompt, std::int64_t seed);
    [[nodiscard]] const std::string& model() const noexcept { return gateway_.config().model; }

  private:
    gateway::Gateway& gateway_;
    gateway::ResponseCache* cache_;
    double temperature_;
    int max_tokens_;
};

inline constexpr int kMaxGenerationAttempts = 3;

struct ExplanationResult {
    /// Absent when every attempt omitted the golden answer.
    std::optional<std::string> explanation;
    int attempts = 0;

    [[nodiscard]] bool rejected() const noexcept { return !explanation.has_value(); }
};

/// Asks for a credibility-guided explanation and accepts the first output
/// containing the normalized golden answer. Backend failures throw.
ExplanationResult generate_explanation(TextGenerator& generator, const QAItem& item, const std::string& golden_answer,
                                       const GenerationTemplates& templates = builtin_generation_templates());

struct Provenance {
    std::string dataset;
    std::string item_id;
    std::string generator;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct TrainingExample {
    std::string question;
    std::vector<std::pair<CredibilityLevel, std::string>> annotated_documents;
    std::string instruction;
    /// Rendered question and credibility-annotated documents.
    std::string input;
    std::string target;
    Provenance provenance;

    friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

/// {"instruction","input","output","meta":{"dataset","item_id","generator"}}
nlohmann::ordered_json to_json(const TrainingExample& e);

/// Rebuilds an example from one JSONL record; documents and question are
/// recovered from the rendered input.
TrainingExample training_example_from_json(const nlohmann::json& j,
                                           int level_count = CredibilityLevel::kDefaultLevelCount);

void write_training_jsonl(const std::vector<TrainingExample>& examples, const std::filesystem::path& path);
std::vector<TrainingExample> load_training_jsonl(const std::filesystem::path& path,
                                                 int level_count = CredibilityLevel::kDefaultLevelCount);

struct Rejection {
    std::string item_id;
    std::string reason;
};

struct CorpusResult {
    /// Ordered by item id.
    std::vector<TrainingExample> examples;
    std::vector<Rejection> rejections;
};

struct CorpusOptions {
    int workers = 1;
    GenerationTemplates templates = builtin_generation_templates();
};

/// Assesses, explains and emits every item. Per-item failures become
/// rejections; the run itself never aborts on them.
CorpusResult build_training_corpus(const Dataset& dataset, const credibility::CredibilityPolicy& policy,
                                   TextGenerator& generator, const CorpusOptions& options = {});

/// One declarative sentence asserting `wrong_option`. Throws
/// PreconditionError on empty inputs, ValidationError after three misses.
std::string generate_fake_claim(TextGenerator& generator, const std::string& question,
                                const std::string& wrong_option,
                                const GenerationTemplates& templates = builtin_generation_templates());

/// A fabricated, low-reliability noise document in the given style.
Document generate_fake_news(TextGenerator& generator, const std::string& claim, NewsStyle style,
                            const std::string& document_id, std::int64_t seed = 0,
                            int level_count = CredibilityLevel::kDefaultLevelCount,
                            const GenerationTemplates& templates = builtin_generation_templates());

inline constexpr const char* kFabricatedSource = "llm-fabricated";
inline constexpr int kValidityChoices[] = {7, 30, 90, 365};

/// First listed choice appearing as a number in `response`.
std::optional<int> parse_validity_choice(std::string_view response);

/// Majority vote over `trials` queries; ties go to the shorter period.
int estimate_validity_period(TextGenerator& generator, const std::string& question, int trials = 3,
                             const GenerationTemplates& templates = builtin_generation_templates());

struct PolluteOptions {
    /// Fixed document count per item; when unset every relevant document is
    /// kept and the total is round(relevant / (1 - ratio)).
    std::optional<int> total_documents;
    std::vector<NewsStyle> styles{NewsStyle::News, NewsStyle::Twitter};
    std::uint64_t seed = 0;
    Placement placement = Placement::Shuffle;
    int level_count = CredibilityLevel::kDefaultLevelCount;
    /// Used to fabricate missing noise for multiple-choice items.
    TextGenerator* generator = nullptr;
    GenerationTemplates templates = builtin_generation_templates();
};

/// Total document count for an item with `relevant` relevant documents.
int pollution_total(double ratio, std::size_t relevant, const std::optional<int>& fixed_total);

/// Rebuilds one item's documents at `ratio` from its is_noise split. The
/// mixing seed derives from (options.seed, item id, ratio).
QAItem pollute_item(const QAItem& item, double ratio, const PolluteOptions& options);

/// Rebuilds every item's documents at `ratio`; realized counts go to the
/// dataset metadata.
Dataset pollute_dataset(const Dataset& dataset, double ratio, const PolluteOptions& options);

}  // namespace credrag::datagen
