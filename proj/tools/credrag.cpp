// credrag command-line driver.
//
// Exit codes: 0 success, 1 configuration or input error, 2 when the share of
// failed items (or rejected corpus items) exceeds the failure threshold.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "credrag/credibility.hpp"
#include "credrag/datagen.hpp"
#include "credrag/dataset_io.hpp"
#include "credrag/error.hpp"
#include "credrag/harness.hpp"
#include "credrag/log.hpp"
#include "credrag/segment.hpp"
#include "credrag/text.hpp"

namespace fs = std::filesystem;
using namespace credrag;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

// Raw flag values. Only flags the user actually passed override the config file.
struct Flags {
    std::string config;
    std::string dataset;
    std::string policy;
    std::string backend;
    std::string strategy;
    std::string shots;
    int shot_count = 3;
    std::string templates;
    std::string metrics;
    std::string ratios;
    int total = 0;
    std::string placement;
    std::string styles = "news,twitter";
    std::string out;
    std::string cache;
    int workers = 1;
    std::uint64_t seed = 0;
    double failure_threshold = 0.0;
    std::string run;
    std::string format = "markdown";
    std::string log_level = "info";
};

struct Options {
    CLI::Option* config = nullptr;
    CLI::Option* dataset = nullptr;
    CLI::Option* policy = nullptr;
    CLI::Option* backend = nullptr;
    CLI::Option* strategy = nullptr;
    CLI::Option* shots = nullptr;
    CLI::Option* shot_count = nullptr;
    CLI::Option* templates = nullptr;
    CLI::Option* metrics = nullptr;
    CLI::Option* ratios = nullptr;
    CLI::Option* total = nullptr;
    CLI::Option* placement = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* cache = nullptr;
    CLI::Option* workers = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* failure_threshold = nullptr;
};

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

std::vector<double> parse_ratios(const std::string& s) {
    std::vector<double> out;
    for (const auto& part : text::split(s, ',')) {
        auto t = text::trim(part);
        if (t.empty()) continue;
        try {
            std::size_t used = 0;
            double r = std::stod(std::string(t), &used);
            if (used != t.size()) throw std::invalid_argument("trailing characters");
            out.push_back(r);
        } catch (const std::exception&) {
            throw ConfigError("bad ratio '" + std::string(t) + "'");
        }
    }
    if (out.empty()) throw ConfigError("no ratios given");
    return out;
}

std::vector<std::string> parse_list(const std::string& s) {
    std::vector<std::string> out;
    for (const auto& part : text::split(s, ',')) {
        auto t = text::trim(part);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

// "all" expands to every strategy; otherwise a comma-separated list.
std::vector<promptkit::Strategy> parse_strategies(const std::string& s) {
    if (s == "all") return promptkit::all_strategies();
    std::vector<promptkit::Strategy> out;
    for (const auto& name : parse_list(s)) out.push_back(promptkit::Strategy::parse(name));
    if (out.empty()) throw ConfigError("no strategy given");
    return out;
}

datagen::Placement parse_placement(const std::string& s) {
    if (s == "shuffle") return datagen::Placement::Shuffle;
    if (s == "noise_first") return datagen::Placement::NoiseFirst;
    throw ConfigError("unknown placement '" + s + "' (expected shuffle or noise_first)");
}

harness::EvalConfig build_config(const Flags& f, const Options& o, bool needs_backend) {
    harness::EvalConfig c;
    if (given(o.config)) {
        std::ifstream in(f.config);
        if (!in) throw ConfigError("cannot open config '" + f.config + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config '" + f.config + "' is not valid JSON: " + e.what());
        }
        c = harness::eval_config_from_json(j);
    }
    if (given(o.dataset)) c.dataset_path = f.dataset;
    if (given(o.policy)) c.policy = credibility::load_policy(f.policy);
    if (given(o.backend)) c.backend = gateway::resolve_backend_config(f.backend);
    if (given(o.shots)) c.shots_path = f.shots;
    if (given(o.shot_count)) c.shot_count = f.shot_count;
    if (given(o.templates)) c.template_dir = f.templates;
    if (given(o.metrics)) {
        c.metrics.clear();
        for (const auto& m : parse_list(f.metrics)) c.metrics.push_back(harness::parse_metric(m));
    }
    if (given(o.ratios)) c.noise_ratios = parse_ratios(f.ratios);
    if (given(o.total)) c.sweep_total = f.total;
    if (given(o.placement)) c.placement = parse_placement(f.placement);
    if (given(o.out)) c.output_dir = f.out;
    if (given(o.cache)) c.cache_dir = f.cache;
    if (given(o.workers)) c.workers = f.workers;
    if (given(o.seed)) c.seed = f.seed;
    if (given(o.failure_threshold)) c.failure_threshold = f.failure_threshold;
    if (c.dataset_path.empty()) throw ConfigError("no dataset given (--dataset or config \"dataset\")");
    if (c.backend.id.empty()) {
        if (needs_backend) throw ConfigError("no backend given (--backend or config \"backend\")");
        // Never called; stands in so the rest of the config still validates.
        auto probe = c;
        probe.backend = gateway::resolve_backend_config("first_doc");
        probe.validate();
    } else {
        c.validate();
    }
    return c;
}

Dataset load_input(const harness::EvalConfig& c) {
    LoadOptions opts;
    opts.level_count = c.policy.level_count;
    return load_dataset(c.dataset_path, opts);
}

fs::path require_out(const harness::EvalConfig& c) {
    if (c.output_dir.empty()) throw ConfigError("no output path given (--out)");
    return c.output_dir;
}

int partial_exit(std::size_t failed, std::size_t total, double threshold, const char* what) {
    if (total == 0 || failed == 0) return kExitOk;
    double share = static_cast<double>(failed) / static_cast<double>(total);
    std::fprintf(stderr, "%zu of %zu %s failed\n", failed, total, what);
    return share > threshold ? kExitPartial : kExitOk;
}

std::unique_ptr<gateway::ResponseCache> open_cache(const harness::EvalConfig& c) {
    if (c.cache_dir.empty()) return nullptr;
    return std::make_unique<gateway::ResponseCache>(c.cache_dir);
}

int cmd_annotate(const harness::EvalConfig& c) {
    auto ds = load_input(c);
    auto out = require_out(c);
    std::string units;
    for (auto& item : ds.items) {
        if (c.policy.bucketing != credibility::Bucketing::GoldLabel) item = credibility::fill_missing_relevance(item);
        item = credibility::assess(item, c.policy);
        if (c.policy.granularity == credibility::Granularity::SentenceLevel) {
            for (const auto& u : credibility::annotate_item_units(item, c.policy)) {
                auto j = credibility::to_json(u);
                j["item_id"] = item.id;
                units += j.dump() + "\n";
            }
        }
    }
    ds.metadata["credibility_policy"] = credibility::to_json(c.policy);
    save_dataset(ds, out);
    if (c.policy.granularity == credibility::Granularity::SentenceLevel) {
        fs::path units_path = out;
        units_path.replace_extension(".units.jsonl");
        write_file_atomic(units_path, units);
    }
    std::printf("annotated %zu items -> %s\n", ds.items.size(), out.string().c_str());
    return kExitOk;
}

int cmd_transform(const harness::EvalConfig& c) {
    auto ds = load_input(c);
    auto out = require_out(c);
    gateway::Gateway gw(c.backend);
    auto cache = open_cache(c);
    datagen::TextGenerator gen(gw, cache.get(), c.temperature, c.max_tokens);
    datagen::CorpusOptions opts;
    opts.workers = c.workers;
    auto result = datagen::build_training_corpus(ds, c.policy, gen, opts);
    datagen::write_training_jsonl(result.examples, out);

    std::string rejections;
    for (const auto& r : result.rejections) {
        rejections += nlohmann::ordered_json{{"item_id", r.item_id}, {"reason", r.reason}}.dump() + "\n";
    }
    fs::path rejections_path = out;
    rejections_path.replace_extension(".rejections.jsonl");
    write_file_atomic(rejections_path, rejections);
    std::printf("wrote %zu examples (%zu rejected) -> %s\n", result.examples.size(), result.rejections.size(),
                out.string().c_str());
    return partial_exit(result.rejections.size(), ds.items.size(), c.failure_threshold, "items");
}

int cmd_pollute(const harness::EvalConfig& c, const std::string& styles, bool has_backend) {
    auto ds = load_input(c);
    auto out = require_out(c);
    if (c.noise_ratios.empty()) throw ConfigError("no ratio given (--ratio)");

    datagen::PolluteOptions opts;
    opts.total_documents = c.sweep_total;
    opts.seed = c.seed;
    opts.placement = c.placement;
    opts.level_count = c.policy.level_count;
    opts.styles.clear();
    for (const auto& s : parse_list(styles)) opts.styles.push_back(datagen::parse_news_style(s));
    if (opts.styles.empty()) throw ConfigError("no news style given");

    std::optional<gateway::Gateway> gw;
    std::unique_ptr<gateway::ResponseCache> cache;
    std::optional<datagen::TextGenerator> gen;
    if (has_backend) {
        gw.emplace(c.backend);
        cache = open_cache(c);
        gen.emplace(*gw, cache.get(), c.temperature, c.max_tokens);
        opts.generator = &*gen;
    }

    // One ratio writes the file named by --out; several write one file per
    // ratio into that directory.
    bool single = c.noise_ratios.size() == 1;
    if (!single) fs::create_directories(out);
    for (double r : c.noise_ratios) {
        auto polluted = datagen::pollute_dataset(ds, r, opts);
        char name[48];
        std::snprintf(name, sizeof name, "ratio_%.2f.jsonl", r);
        fs::path target = single ? out : out / name;
        save_dataset(polluted, target);
        std::printf("ratio %.2f -> %s\n", r, target.string().c_str());
    }
    return kExitOk;
}

int finish_run(const std::vector<harness::EvalReport>& reports, const harness::EvalConfig& c) {
    auto out = require_out(c);
    harness::write_run_outputs(reports, out);
    std::fputs(harness::render_report(reports, harness::ReportFormat::Markdown).c_str(), stdout);
    std::size_t failed = 0, total = 0;
    for (const auto& r : reports) {
        failed += r.total_errors();
        total += r.evaluated_items();
    }
    return partial_exit(failed, total, c.failure_threshold, "items");
}

int cmd_evaluate(harness::EvalConfig c, const std::vector<promptkit::Strategy>& strategies) {
    // A plain evaluation ignores ratios from the config file.
    c.noise_ratios.clear();
    require_out(c);
    auto ds = load_input(c);
    harness::Evaluator ev(c);
    std::vector<harness::EvalReport> reports;
    if (strategies.empty()) {
        reports.push_back(ev.run_eval(ds));
    } else {
        reports = ev.compare_strategies(ds, strategies);
    }
    return finish_run(reports, c);
}

int cmd_sweep(const harness::EvalConfig& c, const std::vector<promptkit::Strategy>& strategies) {
    if (c.noise_ratios.empty()) throw ConfigError("no ratios given (--ratios)");
    require_out(c);
    auto ds = load_input(c);
    harness::Evaluator ev(c);
    std::vector<harness::EvalReport> reports;
    if (strategies.empty()) {
        reports.push_back(ev.noise_sweep(ds));
    } else {
        reports = ev.compare_strategies(ds, strategies);
    }
    return finish_run(reports, c);
}

int cmd_report(const Flags& f, bool has_out) {
    fs::path run = f.run;
    if (fs::is_directory(run)) run /= "report.json";
    if (!fs::exists(run)) throw ConfigError("no report at '" + run.string() + "'");
    auto reports = harness::load_reports(run);
    auto format = harness::parse_report_format(f.format);
    if (has_out) {
        harness::emit_report(reports, format, f.out);
    } else {
        std::fputs(harness::render_report(reports, format).c_str(), stdout);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Credibility-aware retrieval evaluation toolkit", "credrag"};
    app.require_subcommand(1);
    Flags f;
    app.add_option("--log-level", f.log_level, "debug, info, warn, error or off")->capture_default_str();

    auto* annotate = app.add_subcommand("annotate", "Assess credibility levels for every document");
    auto* transform = app.add_subcommand("transform", "Build a credibility-annotated training corpus");
    auto* pollute = app.add_subcommand("pollute", "Rebuild document sets at given noise ratios");
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate one or more strategies");
    auto* sweep = app.add_subcommand("sweep", "Evaluate across noise ratios");
    auto* report = app.add_subcommand("report", "Render a finished run");

    // One Options record per subcommand so count() reflects that subcommand only.
    std::map<CLI::App*, Options> opts;
    for (auto* sub : {annotate, transform, pollute, evaluate, sweep}) {
        auto& o = opts[sub];
        o.config = sub->add_option("--config", f.config, "JSON file mirroring the evaluation config");
        o.dataset = sub->add_option("--dataset", f.dataset, "Input dataset (JSONL)");
        o.policy = sub->add_option("--policy", f.policy, "Credibility policy JSON file");
        o.out = sub->add_option("--out", f.out, "Output file or directory");
        o.seed = sub->add_option("--seed", f.seed, "Run seed");
        o.workers = sub->add_option("--workers", f.workers, "Worker threads");
        o.failure_threshold =
            sub->add_option("--failure-threshold", f.failure_threshold, "Tolerated share of failed items");
    }
    for (auto* sub : {transform, pollute, evaluate, sweep}) {
        auto& o = opts[sub];
        o.backend = sub->add_option("--backend", f.backend, "Backend JSON file, oracle, first_doc or scripted:<file>");
        o.cache = sub->add_option("--cache", f.cache, "Response cache directory");
    }
    opts[pollute].ratios = pollute->add_option("--ratio", f.ratios, "Noise ratio or comma-separated ratios");
    pollute->add_option("--styles", f.styles, "Fabricated news styles")->capture_default_str();
    for (auto* sub : {pollute, sweep}) {
        auto& o = opts[sub];
        o.total = sub->add_option("--total", f.total, "Fixed document count per item");
        o.placement = sub->add_option("--placement", f.placement, "shuffle or noise_first");
    }
    opts[sweep].ratios = sweep->add_option("--ratios", f.ratios, "Comma-separated noise ratios");
    for (auto* sub : {evaluate, sweep}) {
        auto& o = opts[sub];
        o.strategy = sub->add_option("--strategy", f.strategy, "Strategy name, comma-separated list or all");
        o.shots = sub->add_option("--shots", f.shots, "Few-shot bank (JSONL)");
        o.shot_count = sub->add_option("--shot-count", f.shot_count, "Exemplars per prompt");
        o.templates = sub->add_option("--templates", f.templates, "Prompt template directory");
        o.metrics = sub->add_option("--metrics", f.metrics, "Comma-separated: em, rouge_l, mc");
    }
    report->add_option("--run", f.run, "Run directory or report.json")->required();
    report->add_option("--format", f.format, "json, csv or markdown")->capture_default_str();
    auto* report_out = report->add_option("--out", f.out, "Write to this file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        set_log_level(parse_log_level(f.log_level));
        if (report->parsed()) return cmd_report(f, report_out->count() > 0);

        CLI::App* sub = app.get_subcommands().front();
        const Options& o = opts.at(sub);
        bool needs_backend = sub == transform || sub == evaluate || sub == sweep;
        auto config = build_config(f, o, needs_backend);
        std::vector<promptkit::Strategy> strategies;
        if (given(o.strategy)) strategies = parse_strategies(f.strategy);

        if (sub == annotate) return cmd_annotate(config);
        if (sub == transform) return cmd_transform(config);
        if (sub == pollute) return cmd_pollute(config, f.styles, given(o.backend));
        if (sub == evaluate) return cmd_evaluate(config, strategies);
        return cmd_sweep(config, strategies);
    } catch (const Error& e) {
        std::fprintf(stderr, "credrag: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "credrag: unexpected error: %s\n", e.what());
        return kExitConfig;
    }
}
