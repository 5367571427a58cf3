#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "credrag/types.hpp"

namespace credrag::credibility {

enum class Bucketing { EqualInterval, EqualCount, GoldLabel };
enum class Granularity { DocumentLevel, SentenceLevel };

std::string to_string(Bucketing b);
std::string to_string(Granularity g);
Bucketing parse_bucketing(std::string_view s);
Granularity parse_granularity(std::string_view s);

/// How relevance, timeliness and source reliability combine into a level.
struct CredibilityPolicy {
    int level_count = CredibilityLevel::kDefaultLevelCount;
    Bucketing bucketing = Bucketing::EqualInterval;
    int timeliness_threshold_days = 30;
    bool use_timeliness = true;
    /// Source tag -> reliability level.
    std::map<std::string, int> source_levels;
    /// Level for tags missing from source_levels; unset means the top level.
    std::optional<int> default_source_level;
    Granularity granularity = Granularity::DocumentLevel;

    /// Throws ConfigError.
    void validate() const;

    [[nodiscard]] CredibilityLevel source_level(const std::string& source) const;

    friend bool operator==(const CredibilityPolicy&, const CredibilityPolicy&) = default;
};

nlohmann::ordered_json to_json(const CredibilityPolicy& p);
CredibilityPolicy policy_from_json(const nlohmann::json& j);
CredibilityPolicy load_policy(const std::filesystem::path& path);

/// Compact canonical serialization; the input to the fingerprint.
std::string canonical_string(const CredibilityPolicy& p);

/// SHA-256 of canonical_string(p), hex-encoded.
std::string fingerprint(const CredibilityPolicy& p);

/// Splits [min, max] into `level_count` equal-width bins with edges
/// min + (max - min) * k / level_count. A score on an edge joins the upper
/// bin. A zero-width range maps every score to ceil(level_count / 2).
std::vector<CredibilityLevel> bucket_equal_interval(std::span<const double> scores, int level_count);

/// Ranks by (score desc, index asc) and cuts the ranking into level_count
/// contiguous groups whose sizes differ by at most one; larger groups sit
/// at the top. The first group gets level_count.
std::vector<CredibilityLevel> bucket_equal_count(std::span<const double> scores, int level_count);

/// Dispatches on the policy's bucketing; GoldLabel is rejected here.
std::vector<CredibilityLevel> bucket(std::span<const double> scores, const CredibilityPolicy& policy);

/// max(R - floor(T / threshold), 1)
CredibilityLevel rt_score(CredibilityLevel relevance, int temporal_gap_days, int threshold_days);

/// The lower of the two levels. Throws PreconditionError on mismatched scales.
CredibilityLevel compose_credibility(CredibilityLevel rt, CredibilityLevel source);

/// Whole days from published to query, clamped at zero.
int temporal_gap(const Date& query_date, const Date& published_date);

/// Returns a copy of `item` whose documents carry credibility. Relevance is
/// bucketed per item; timeliness applies only when both dates are present;
/// a document's own source_reliability wins over the policy's source map.
QAItem assess(const QAItem& item, const CredibilityPolicy& policy);

}  // namespace credrag::credibility
