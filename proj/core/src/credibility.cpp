#include "credrag/credibility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "credrag/dataset_io.hpp"
#include "credrag/error.hpp"
#include "credrag/hash.hpp"

namespace credrag::credibility {

std::string to_string(Bucketing b) {
    switch (b) {
        case Bucketing::EqualInterval: return "equal_interval";
        case Bucketing::EqualCount: return "equal_count";
        case Bucketing::GoldLabel: return "gold_label";
    }
    return "unknown";
}

std::string to_string(Granularity g) {
    return g == Granularity::DocumentLevel ? "document" : "sentence";
}

Bucketing parse_bucketing(std::string_view s) {
    if (s == "equal_interval") return Bucketing::EqualInterval;
    if (s == "equal_count") return Bucketing::EqualCount;
    if (s == "gold_label") return Bucketing::GoldLabel;
    throw ConfigError("unknown bucketing '" + std::string(s) + "'");
}

Granularity parse_granularity(std::string_view s) {
    if (s == "document") return Granularity::DocumentLevel;
    if (s == "sentence") return Granularity::SentenceLevel;
    throw ConfigError("unknown granularity '" + std::string(s) + "'");
}

void CredibilityPolicy::validate() const {
    if (level_count < 2) throw ConfigError("policy level_count must be >= 2");
    if (timeliness_threshold_days < 1) throw ConfigError("timeliness_threshold_days must be >= 1");
    auto in_range = [&](int v) { return v >= 1 && v <= level_count; };
    if (default_source_level && !in_range(*default_source_level)) {
        throw ConfigError("default source level outside [1, level_count]");
    }
    for (const auto& [tag, v] : source_levels) {
        if (!in_range(v)) throw ConfigError("source level for '" + tag + "' outside [1, level_count]");
    }
}

CredibilityLevel CredibilityPolicy::source_level(const std::string& source) const {
    if (auto it = source_levels.find(source); it != source_levels.end()) {
        return {it->second, level_count};
    }
    return {default_source_level.value_or(level_count), level_count};
}

nlohmann::ordered_json to_json(const CredibilityPolicy& p) {
    nlohmann::ordered_json j;
    j["level_count"] = p.level_count;
    j["bucketing"] = to_string(p.bucketing);
    j["timeliness_threshold_days"] = p.timeliness_threshold_days;
    j["use_timeliness"] = p.use_timeliness;
    nlohmann::ordered_json sources = nlohmann::ordered_json::object();
    for (const auto& [k, v] : p.source_levels) sources[k] = v;
    j["source_map"] = std::move(sources);
    j["default_source_level"] = p.default_source_level.value_or(p.level_count);
    j["granularity"] = to_string(p.granularity);
    return j;
}

CredibilityPolicy policy_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("policy must be a JSON object");
    CredibilityPolicy p;
    try {
        p.level_count = j.value("level_count", p.level_count);
        if (j.contains("bucketing")) p.bucketing = parse_bucketing(j["bucketing"].get<std::string>());
        p.timeliness_threshold_days = j.value("timeliness_threshold_days", p.timeliness_threshold_days);
        p.use_timeliness = j.value("use_timeliness", p.use_timeliness);
        if (j.contains("source_map")) {
            for (auto it = j["source_map"].begin(); it != j["source_map"].end(); ++it) {
                p.source_levels[it.key()] = it.value().get<int>();
            }
        }
        if (j.contains("default_source_level") && !j["default_source_level"].is_null()) {
            p.default_source_level = j["default_source_level"].get<int>();
        }
        if (j.contains("granularity")) p.granularity = parse_granularity(j["granularity"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed policy: ") + e.what());
    }
    p.validate();
    // Normalize so that an explicit top-level default equals an absent one.
    if (p.default_source_level == p.level_count) p.default_source_level.reset();
    return p;
}

CredibilityPolicy load_policy(const std::filesystem::path& path) {
    try {
        return policy_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("malformed policy file '" + path.string() + "': " + e.what());
    }
}

std::string canonical_string(const CredibilityPolicy& p) { return to_json(p).dump(); }

std::string fingerprint(const CredibilityPolicy& p) { return sha256_hex(canonical_string(p)); }

namespace {

void check_scores(std::span<const double> scores, int level_count) {
    if (scores.empty()) throw PreconditionError("cannot bucket an empty score list");
    if (level_count < 2) throw PreconditionError("level_count must be >= 2");
    for (double s : scores) {
        if (!std::isfinite(s)) throw PreconditionError("non-finite relevance score");
    }
}

}  // namespace

std::vector<CredibilityLevel> bucket_equal_interval(std::span<const double> scores, int level_count) {
    check_scores(scores, level_count);
    auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
    const double lo = *lo_it;
    const double hi = *hi_it;

    std::vector<CredibilityLevel> out;
    out.reserve(scores.size());
    if (hi == lo) {
        out.assign(scores.size(), CredibilityLevel((level_count + 1) / 2, level_count));
        return out;
    }

    auto edge = [&](int k) { return lo + (hi - lo) * static_cast<double>(k) / level_count; };
    for (double s : scores) {
        // Estimate the bin arithmetically, then settle it against the exact edges.
        int bin = static_cast<int>(std::floor((s - lo) / (hi - lo) * level_count));
        bin = std::clamp(bin, 0, level_count - 1);
        while (bin < level_count - 1 && s >= edge(bin + 1)) ++bin;
        while (bin > 0 && s < edge(bin)) --bin;
        out.emplace_back(bin + 1, level_count);
    }
    return out;
}

std::vector<CredibilityLevel> bucket_equal_count(std::span<const double> scores, int level_count) {
    check_scores(scores, level_count);
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    const std::size_t levels = static_cast<std::size_t>(level_count);
    const std::size_t base = n / levels;
    const std::size_t surplus = n % levels;

    std::vector<CredibilityLevel> out(n, CredibilityLevel(1, level_count));
    std::size_t rank = 0;
    for (std::size_t g = 0; g < levels && rank < n; ++g) {
        std::size_t size = base + (g < surplus ? 1 : 0);
        int level = level_count - static_cast<int>(g);
        for (std::size_t i = 0; i < size; ++i, ++rank) out[order[rank]] = CredibilityLevel(level, level_count);
    }
    return out;
}

std::vector<CredibilityLevel> bucket(std::span<const double> scores, const CredibilityPolicy& policy) {
    switch (policy.bucketing) {
        case Bucketing::EqualInterval: return bucket_equal_interval(scores, policy.level_count);
        case Bucketing::EqualCount: return bucket_equal_count(scores, policy.level_count);
        case Bucketing::GoldLabel: break;
    }
    throw ConfigError("gold_label bucketing has no score-based form");
}

CredibilityLevel rt_score(CredibilityLevel relevance, int temporal_gap_days, int threshold_days) {
    if (temporal_gap_days < 0) throw PreconditionError("temporal gap must be >= 0");
    if (threshold_days < 1) throw PreconditionError("timeliness threshold must be >= 1");
    int steps = temporal_gap_days / threshold_days;
    return {std::max(relevance.value() - steps, 1), relevance.level_count()};
}

CredibilityLevel compose_credibility(CredibilityLevel rt, CredibilityLevel source) {
    if (rt.level_count() != source.level_count()) {
        throw PreconditionError("cannot compose levels on different scales (" + std::to_string(rt.level_count()) +
                                " vs " + std::to_string(source.level_count()) + ")");
    }
    return rt.value() <= source.value() ? rt : source;
}

int temporal_gap(const Date& query_date, const Date& published_date) {
    auto gap = (query_date.days() - published_date.days()).count();
    return static_cast<int>(std::max<decltype(gap)>(gap, 0));
}

QAItem assess(const QAItem& item, const CredibilityPolicy& policy) {
    policy.validate();
    QAItem out = item;
    if (out.documents.empty()) return out;

    if (policy.bucketing == Bucketing::GoldLabel) {
        for (auto& doc : out.documents) {
            bool gold = doc.is_gold.value_or(false);
            doc.credibility = CredibilityLevel(gold ? policy.level_count : 1, policy.level_count);
        }
        return out;
    }

    std::vector<double> scores;
    scores.reserve(out.documents.size());
    for (const auto& doc : out.documents) {
        if (!doc.relevance_score) {
            throw PreconditionError("document '" + doc.id + "' of item '" + item.id + "' has no relevance_score");
        }
        scores.push_back(*doc.relevance_score);
    }
    auto relevance = bucket(scores, policy);

    for (std::size_t i = 0; i < out.documents.size(); ++i) {
        auto& doc = out.documents[i];
        CredibilityLevel level = relevance[i];
        if (policy.use_timeliness && item.query_date && doc.published_date) {
            level = rt_score(level, temporal_gap(*item.query_date, *doc.published_date),
                             policy.timeliness_threshold_days);
        }
        CredibilityLevel source = doc.source_reliability ? *doc.source_reliability : policy.source_level(doc.source);
        doc.credibility = compose_credibility(level, source);
    }
    return out;
}

}  // namespace credrag::credibility
