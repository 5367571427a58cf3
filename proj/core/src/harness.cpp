#include "credrag/harness.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "credrag/bm25.hpp"
#include "credrag/dataset_io.hpp"
#include "credrag/datagen.hpp"
#include "credrag/error.hpp"
#include "credrag/hash.hpp"

namespace credrag::harness {

std::string to_string(Metric m) {
    switch (m) {
        case Metric::ExactMatch: return "em";
        case Metric::RougeL: return "rouge_l";
        case Metric::MultipleChoice: return "mc";
    }
    return "unknown";
}

Metric parse_metric(std::string_view s) {
    if (s == "em") return Metric::ExactMatch;
    if (s == "rouge_l" || s == "rouge-l") return Metric::RougeL;
    if (s == "mc" || s == "mc_accuracy") return Metric::MultipleChoice;
    throw ConfigError("unknown metric '" + std::string(s) + "'");
}

void EvalConfig::validate() const {
    if (metrics.empty()) throw ConfigError("metric set is empty");
    if (workers < 1) throw ConfigError("worker count must be >= 1");
    if (shot_count < 0) throw ConfigError("shot_count must be >= 0");
    for (double r : noise_ratios) {
        if (!(r >= 0.0 && r < 1.0)) throw ConfigError("noise ratio " + std::to_string(r) + " outside [0, 1)");
    }
    if (sweep_total && *sweep_total < 1) throw ConfigError("sweep_total must be >= 1");
    if (!(failure_threshold >= 0.0 && failure_threshold <= 1.0)) {
        throw ConfigError("failure_threshold must lie in [0, 1]");
    }
    if (strategy.kind == promptkit::StrategyKind::TopKSimilar && strategy.k < 1) {
        throw ConfigError("top_k_similar needs k >= 1");
    }
    policy.validate();
    backend.validate();
}

nlohmann::ordered_json to_json(const EvalConfig& c) {
    nlohmann::ordered_json j;
    j["dataset"] = c.dataset_path.string();
    j["strategy"] = c.strategy.name();
    j["policy"] = credibility::to_json(c.policy);
    j["backend"] = gateway::to_json(c.backend);
    j["shots"] = c.shots_path.string();
    j["shot_count"] = c.shot_count;
    j["templates"] = c.template_dir.string();
    auto ms = nlohmann::ordered_json::array();
    for (auto m : c.metrics) ms.push_back(to_string(m));
    j["metrics"] = ms;
    j["noise_ratios"] = c.noise_ratios;
    j["sweep_total"] = c.sweep_total ? nlohmann::ordered_json(*c.sweep_total) : nlohmann::ordered_json(nullptr);
    j["placement"] = c.placement == datagen::Placement::Shuffle ? "shuffle" : "noise_first";
    j["output_dir"] = c.output_dir.string();
    j["cache_dir"] = c.cache_dir.string();
    j["workers"] = c.workers;
    j["seed"] = c.seed;
    j["temperature"] = c.temperature;
    j["max_tokens"] = c.max_tokens;
    j["failure_threshold"] = c.failure_threshold;
    return j;
}

EvalConfig eval_config_from_json(const nlohmann::json& j, EvalConfig c) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    try {
        if (j.contains("dataset")) c.dataset_path = j["dataset"].get<std::string>();
        if (j.contains("strategy")) c.strategy = promptkit::Strategy::parse(j["strategy"].get<std::string>());
        if (j.contains("policy")) {
            const auto& p = j["policy"];
            c.policy = p.is_string() ? credibility::load_policy(p.get<std::string>()) : credibility::policy_from_json(p);
        }
        if (j.contains("backend")) {
            const auto& b = j["backend"];
            c.backend = b.is_string() ? gateway::resolve_backend_config(b.get<std::string>())
                                      : gateway::backend_config_from_json(b);
        }
        if (j.contains("shots")) c.shots_path = j["shots"].get<std::string>();
        c.shot_count = j.value("shot_count", c.shot_count);
        if (j.contains("templates")) c.template_dir = j["templates"].get<std::string>();
        if (j.contains("metrics")) {
            c.metrics.clear();
            for (const auto& m : j["metrics"]) c.metrics.push_back(parse_metric(m.get<std::string>()));
        }
        if (j.contains("noise_ratios")) c.noise_ratios = j["noise_ratios"].get<std::vector<double>>();
        if (j.contains("sweep_total") && !j["sweep_total"].is_null()) c.sweep_total = j["sweep_total"].get<int>();
        if (j.contains("placement")) {
            auto p = j["placement"].get<std::string>();
            if (p == "shuffle") {
                c.placement = datagen::Placement::Shuffle;
            } else if (p == "noise_first") {
                c.placement = datagen::Placement::NoiseFirst;
            } else {
                throw ConfigError("unknown placement '" + p + "'");
            }
        }
        if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
        if (j.contains("cache_dir")) c.cache_dir = j["cache_dir"].get<std::string>();
        c.workers = j.value("workers", c.workers);
        c.seed = j.value("seed", c.seed);
        c.temperature = j.value("temperature", c.temperature);
        c.max_tokens = j.value("max_tokens", c.max_tokens);
        c.failure_threshold = j.value("failure_threshold", c.failure_threshold);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return c;
}

std::size_t EvalReport::evaluated_items() const {
    if (!is_sweep()) return items.size();
    std::size_t n = 0;
    for (const auto& r : per_ratio) n += r.items.size();
    return n;
}

std::size_t EvalReport::total_errors() const {
    if (!is_sweep()) return error_count;
    std::size_t n = 0;
    for (const auto& r : per_ratio) n += r.error_count;
    return n;
}

Aggregates aggregate(const std::vector<metrics::ScoredItem>& items) {
    double em = 0, rouge = 0, mc = 0;
    std::size_t n_em = 0, n_rouge = 0, n_mc = 0;
    for (const auto& s : items) {
        if (s.error) continue;
        if (s.em) em += *s.em, ++n_em;
        if (s.rouge_l) rouge += *s.rouge_l, ++n_rouge;
        if (s.mc_correct) mc += *s.mc_correct ? 1.0 : 0.0, ++n_mc;
    }
    Aggregates out;
    if (n_em) out["em"] = em / static_cast<double>(n_em);
    if (n_rouge) out["rouge_l"] = rouge / static_cast<double>(n_rouge);
    if (n_mc) out["mc_accuracy"] = mc / static_cast<double>(n_mc);
    return out;
}

Evaluator::Evaluator(EvalConfig config) : Evaluator(config, std::make_shared<gateway::Gateway>(config.backend)) {}

Evaluator::Evaluator(EvalConfig config, std::shared_ptr<gateway::Gateway> gateway)
    : config_(std::move(config)), gateway_(std::move(gateway)) {
    config_.validate();
    if (!config_.cache_dir.empty()) cache_ = std::make_unique<gateway::ResponseCache>(config_.cache_dir);
    if (!config_.shots_path.empty()) {
        shots_ = promptkit::FewShotBank::load(config_.shots_path, config_.policy.level_count)
                     .first(static_cast<std::size_t>(config_.shot_count));
    }
    templates_ = config_.template_dir.empty() ? promptkit::builtin_templates()
                                              : promptkit::load_template_set(config_.template_dir);
}

metrics::ScoredItem Evaluator::score_item(const QAItem& item, const promptkit::Strategy& strategy) {
    metrics::ScoredItem scored;
    scored.item_id = item.id;
    try {
        if (!item.is_evaluable()) throw PreconditionError("item has neither answers nor a correct option");

        QAItem prepared = item;
        bool missing_credibility = std::any_of(prepared.documents.begin(), prepared.documents.end(),
                                               [](const Document& d) { return !d.credibility; });
        bool needs_scores = strategy.reads_scores() ||
                            (missing_credibility && config_.policy.bucketing != credibility::Bucketing::GoldLabel);
        if (needs_scores) prepared = credibility::fill_missing_relevance(prepared);
        if (missing_credibility) prepared = credibility::assess(prepared, config_.policy);

        gateway::GenerationRequest req;
        req.backend_id = gateway_->config().id;
        req.model = gateway_->config().model;
        req.prompt = promptkit::assemble(strategy, prepared, shots_, templates_);
        req.temperature = config_.temperature;
        req.max_tokens = config_.max_tokens;
        auto completion = cache_ ? gateway::cached_complete(req, *gateway_, *cache_) : gateway_->complete(req);
        scored.generation = completion.text;

        auto wants = [&](Metric m) {
            return std::find(config_.metrics.begin(), config_.metrics.end(), m) != config_.metrics.end();
        };
        if (item.is_multiple_choice()) {
            if (wants(Metric::MultipleChoice) || wants(Metric::ExactMatch)) {
                scored.mc_correct = metrics::mc_accuracy(scored.generation, item.options, *item.correct_option);
            }
            if (wants(Metric::ExactMatch)) scored.em = *scored.mc_correct ? 1.0 : 0.0;
        } else {
            if (wants(Metric::ExactMatch)) scored.em = metrics::exact_match(scored.generation, item.answers);
            if (wants(Metric::RougeL)) {
                double best = 0.0;
                for (const auto& a : item.answers) best = std::max(best, metrics::rouge_l(scored.generation, a));
                scored.rouge_l = best;
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        scored = metrics::ScoredItem{};
        scored.item_id = item.id;
        scored.error = e.what();
    }
    return scored;
}

std::vector<metrics::ScoredItem> Evaluator::score_items(const std::vector<QAItem>& items,
                                                        const promptkit::Strategy& strategy) {
    std::vector<metrics::ScoredItem> out(items.size());
    const auto workers = static_cast<std::size_t>(config_.workers);
    if (workers == 1 || items.size() < 2) {
        for (std::size_t i = 0; i < items.size(); ++i) out[i] = score_item(items[i], strategy);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mu;
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < std::min(workers, items.size()); ++w) {
                pool.emplace_back([&] {
                    for (std::size_t i; (i = next.fetch_add(1)) < items.size();) {
                        try {
                            out[i] = score_item(items[i], strategy);
                        } catch (...) {
                            std::lock_guard lock(failure_mu);
                            if (!failure) failure = std::current_exception();
                        }
                    }
                });
            }
        }
        if (failure) std::rethrow_exception(failure);
    }
    std::sort(out.begin(), out.end(),
              [](const metrics::ScoredItem& a, const metrics::ScoredItem& b) { return a.item_id < b.item_id; });
    return out;
}

RunManifest Evaluator::make_manifest(const Dataset& dataset, const promptkit::Strategy& strategy) const {
    RunManifest m;
    m.dataset_name = dataset.name;
    m.strategy = strategy.name();
    m.policy_fingerprint = credibility::fingerprint(config_.policy);
    m.backend_id = gateway_->config().id;
    m.model = gateway_->config().model;
    m.temperature = config_.temperature;
    m.max_tokens = config_.max_tokens;
    const auto& tmpl = templates_.for_strategy(strategy);
    m.template_name = tmpl.name;
    m.template_version = tmpl.version;
    m.shot_bank = config_.shots_path.empty() ? "" : config_.shots_path.filename().string();
    m.run_seed = config_.seed;

    auto identity = to_json(m, false);
    identity["noise_ratios"] = config_.noise_ratios;
    identity["shot_count"] = shots_.size();
    m.run_id = sha256_hex(identity.dump()).substr(0, 16);
    return m;
}

EvalReport Evaluator::run_eval(const Dataset& dataset) { return run_eval(dataset, config_.strategy); }

EvalReport Evaluator::run_eval(const Dataset& dataset, const promptkit::Strategy& strategy) {
    EvalReport report;
    report.manifest = make_manifest(dataset, strategy);
    report.manifest.started_at = utc_timestamp();
    report.items = score_items(dataset.items, strategy);
    report.aggregates = aggregate(report.items);
    report.error_count = static_cast<std::size_t>(
        std::count_if(report.items.begin(), report.items.end(), [](const auto& s) { return s.error.has_value(); }));
    report.manifest.finished_at = utc_timestamp();
    return report;
}

EvalReport Evaluator::noise_sweep(const Dataset& dataset) { return noise_sweep(dataset, config_.strategy); }

EvalReport Evaluator::noise_sweep(const Dataset& dataset, const promptkit::Strategy& strategy) {
    if (config_.noise_ratios.empty()) throw ConfigError("noise sweep needs at least one ratio");
    for (const auto& item : dataset.items) {
        for (const auto& d : item.documents) {
            if (!d.is_noise) {
                throw ConfigError("item '" + item.id + "' document '" + d.id + "' lacks an is_noise flag");
            }
        }
    }

    EvalReport report;
    report.manifest = make_manifest(dataset, strategy);
    report.manifest.started_at = utc_timestamp();

    datagen::PolluteOptions mix;
    mix.total_documents = config_.sweep_total;
    mix.seed = config_.seed;
    mix.placement = config_.placement;
    mix.level_count = config_.policy.level_count;

    for (double ratio : config_.noise_ratios) {
        std::vector<QAItem> mixed;
        std::vector<metrics::ScoredItem> failed;
        for (const auto& item : dataset.items) {
            try {
                mixed.push_back(datagen::pollute_item(item, ratio, mix));
            } catch (const PreconditionError& e) {
                metrics::ScoredItem s;
                s.item_id = item.id;
                s.error = e.what();
                failed.push_back(std::move(s));
            }
        }
        RatioBreakdown row;
        row.ratio = ratio;
        row.items = score_items(mixed, strategy);
        row.items.insert(row.items.end(), failed.begin(), failed.end());
        std::sort(row.items.begin(), row.items.end(),
                  [](const auto& a, const auto& b) { return a.item_id < b.item_id; });
        row.aggregates = aggregate(row.items);
        row.error_count = static_cast<std::size_t>(
            std::count_if(row.items.begin(), row.items.end(), [](const auto& s) { return s.error.has_value(); }));
        report.per_ratio.push_back(std::move(row));
    }
    report.manifest.finished_at = utc_timestamp();
    return report;
}

std::vector<EvalReport> Evaluator::compare_strategies(const Dataset& dataset,
                                                      const std::vector<promptkit::Strategy>& strategies) {
    if (strategies.empty()) throw ConfigError("no strategies to compare");
    std::vector<EvalReport> out;
    for (const auto& s : strategies) {
        out.push_back(config_.noise_ratios.empty() ? run_eval(dataset, s) : noise_sweep(dataset, s));
    }
    return out;
}

namespace {

Dataset load_for(const EvalConfig& config) {
    LoadOptions opts;
    opts.level_count = config.policy.level_count;
    return load_dataset(config.dataset_path, opts);
}

}  // namespace

EvalReport run_eval(const EvalConfig& config) {
    config.validate();
    Evaluator ev(config);
    auto report = ev.run_eval(load_for(config));
    if (!config.output_dir.empty()) write_run_outputs({report}, config.output_dir);
    return report;
}

EvalReport noise_sweep(const EvalConfig& config) {
    config.validate();
    Evaluator ev(config);
    auto report = ev.noise_sweep(load_for(config));
    if (!config.output_dir.empty()) write_run_outputs({report}, config.output_dir);
    return report;
}

std::vector<EvalReport> compare_strategies(const EvalConfig& config, const std::vector<promptkit::Strategy>& strategies) {
    config.validate();
    Evaluator ev(config);
    auto reports = ev.compare_strategies(load_for(config), strategies);
    if (!config.output_dir.empty()) write_run_outputs(reports, config.output_dir);
    return reports;
}

}  // namespace credrag::harness
