#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace credrag {

/// Identity of one evaluation run. Everything except the two timestamps is
/// a deterministic function of the run configuration.
struct RunManifest {
    std::string run_id;
    std::string dataset_name;
    std::string strategy;
    std::string policy_fingerprint;
    std::string backend_id;
    std::string model;
    double temperature = 0.01;
    int max_tokens = 512;
    std::optional<std::int64_t> seed;
    std::string template_name;
    std::string template_version;
    std::string shot_bank;
    std::uint64_t run_seed = 0;
    std::string started_at;
    std::string finished_at;

    friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

nlohmann::ordered_json to_json(const RunManifest& m, bool include_timestamps = true);
RunManifest manifest_from_json(const nlohmann::json& j);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace credrag
