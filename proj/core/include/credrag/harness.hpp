#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "credrag/credibility.hpp"
#include "credrag/gateway.hpp"
#include "credrag/manifest.hpp"
#include "credrag/metrics.hpp"
#include "credrag/mix_noise.hpp"
#include "credrag/promptkit.hpp"
#include "credrag/types.hpp"

namespace credrag::harness {

enum class Metric { ExactMatch, RougeL, MultipleChoice };

std::string to_string(Metric m);
Metric parse_metric(std::string_view s);

struct EvalConfig {
    std::filesystem::path dataset_path;
    promptkit::Strategy strategy = promptkit::Strategy::retrieval_credibility();
    credibility::CredibilityPolicy policy;
    gateway::BackendConfig backend;
    /// Empty for zero-shot.
    std::filesystem::path shots_path;
    int shot_count = 3;
    /// Empty selects the built-in templates.
    std::filesystem::path template_dir;
    std::vector<Metric> metrics{Metric::ExactMatch};
    std::vector<double> noise_ratios;
    /// Per-item document count during sweeps; unset keeps every relevant
    /// document and sizes the noise around it.
    std::optional<int> sweep_total;
    datagen::Placement placement = datagen::Placement::Shuffle;
    std::filesystem::path output_dir;
    /// Empty disables response caching.
    std::filesystem::path cache_dir;
    int workers = 1;
    std::uint64_t seed = 0;
    double temperature = 0.01;
    int max_tokens = 512;
    /// Fraction of failed items above which the CLI exits with code 2.
    double failure_threshold = 0.0;

    /// Throws ConfigError.
    void validate() const;
};

nlohmann::ordered_json to_json(const EvalConfig& c);
/// Missing keys keep their defaults.
EvalConfig eval_config_from_json(const nlohmann::json& j, EvalConfig base = {});

using Aggregates = std::map<std::string, double>;

struct RatioBreakdown {
    double ratio = 0.0;
    std::vector<metrics::ScoredItem> items;
    Aggregates aggregates;
    std::size_t error_count = 0;

    friend bool operator==(const RatioBreakdown&, const RatioBreakdown&) = default;
};

struct EvalReport {
    RunManifest manifest;
    /// Ordered by item id. Empty for sweeps, which report per ratio.
    std::vector<metrics::ScoredItem> items;
    Aggregates aggregates;
    std::size_t error_count = 0;
    std::vector<RatioBreakdown> per_ratio;

    [[nodiscard]] bool is_sweep() const { return !per_ratio.empty(); }
    [[nodiscard]] std::size_t evaluated_items() const;
    [[nodiscard]] std::size_t total_errors() const;
};

/// Arithmetic means over items that carry each score; errored items are
/// excluded. Keys: em, rouge_l, mc_accuracy.
Aggregates aggregate(const std::vector<metrics::ScoredItem>& items);

/// Runs evaluations against one backend, sharing its cache between runs.
class Evaluator {
  public:
    explicit Evaluator(EvalConfig config);
    /// Uses an existing gateway, e.g. one wrapping a test backend.
    Evaluator(EvalConfig config, std::shared_ptr<gateway::Gateway> gateway);

    /// assess -> strategy transform -> assemble -> complete -> score, per item.
    EvalReport run_eval(const Dataset& dataset);
    EvalReport run_eval(const Dataset& dataset, const promptkit::Strategy& strategy);

    /// Re-mixes every item at each configured ratio and evaluates it.
    EvalReport noise_sweep(const Dataset& dataset);
    EvalReport noise_sweep(const Dataset& dataset, const promptkit::Strategy& strategy);

    /// One report per strategy over identical items and mixtures.
    std::vector<EvalReport> compare_strategies(const Dataset& dataset, const std::vector<promptkit::Strategy>& strategies);

    [[nodiscard]] const EvalConfig& config() const noexcept { return config_; }
    [[nodiscard]] gateway::Gateway& gateway() noexcept { return *gateway_; }

  private:
    std::vector<metrics::ScoredItem> score_items(const std::vector<QAItem>& items, const promptkit::Strategy& strategy);
    metrics::ScoredItem score_item(const QAItem& item, const promptkit::Strategy& strategy);
    RunManifest make_manifest(const Dataset& dataset, const promptkit::Strategy& strategy) const;

    EvalConfig config_;
    std::shared_ptr<gateway::Gateway> gateway_;
    std::unique_ptr<gateway::ResponseCache> cache_;
    promptkit::FewShotBank shots_;
    promptkit::TemplateSet templates_;
};

/// File-driven forms: load the dataset named in the config.
EvalReport run_eval(const EvalConfig& config);
EvalReport noise_sweep(const EvalConfig& config);
std::vector<EvalReport> compare_strategies(const EvalConfig& config, const std::vector<promptkit::Strategy>& strategies);

enum class ReportFormat { Json, Csv, Markdown };

ReportFormat parse_report_format(std::string_view s);
std::string extension(ReportFormat f);

/// JSON excludes wall-clock timestamps so reruns are byte-identical;
/// write_manifests records those separately.
nlohmann::ordered_json to_json(const EvalReport& report);
nlohmann::ordered_json to_json(const std::vector<EvalReport>& reports);
EvalReport report_from_json(const nlohmann::json& j);
std::vector<EvalReport> reports_from_json(const nlohmann::json& j);

std::string render_report(const std::vector<EvalReport>& reports, ReportFormat format);

/// Writes render_report output to `path`.
void emit_report(const std::vector<EvalReport>& reports, ReportFormat format, const std::filesystem::path& path);

/// report.json, report.csv, report.md and manifest.json under `dir`.
void write_run_outputs(const std::vector<EvalReport>& reports, const std::filesystem::path& dir);

std::vector<EvalReport> load_reports(const std::filesystem::path& report_json);

}  // namespace credrag::harness
