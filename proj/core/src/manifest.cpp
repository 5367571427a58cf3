#include "credrag/manifest.hpp"

#include <chrono>
#include <ctime>

namespace credrag {

nlohmann::ordered_json to_json(const RunManifest& m, bool include_timestamps) {
    nlohmann::ordered_json j;
    j["run_id"] = m.run_id;
    j["dataset"] = m.dataset_name;
    j["strategy"] = m.strategy;
    j["policy_fingerprint"] = m.policy_fingerprint;
    j["backend"] = m.backend_id;
    j["model"] = m.model;
    j["temperature"] = m.temperature;
    j["max_tokens"] = m.max_tokens;
    j["seed"] = m.seed ? nlohmann::ordered_json(*m.seed) : nlohmann::ordered_json(nullptr);
    j["template"] = m.template_name;
    j["template_version"] = m.template_version;
    j["shot_bank"] = m.shot_bank;
    j["run_seed"] = m.run_seed;
    if (include_timestamps) {
        j["started_at"] = m.started_at;
        j["finished_at"] = m.finished_at;
    }
    return j;
}

RunManifest manifest_from_json(const nlohmann::json& j) {
    RunManifest m;
    m.run_id = j.value("run_id", "");
    m.dataset_name = j.value("dataset", "");
    m.strategy = j.value("strategy", "");
    m.policy_fingerprint = j.value("policy_fingerprint", "");
    m.backend_id = j.value("backend", "");
    m.model = j.value("model", "");
    m.temperature = j.value("temperature", 0.01);
    m.max_tokens = j.value("max_tokens", 512);
    if (j.contains("seed") && !j["seed"].is_null()) m.seed = j["seed"].get<std::int64_t>();
    m.template_name = j.value("template", "");
    m.template_version = j.value("template_version", "");
    m.shot_bank = j.value("shot_bank", "");
    m.run_seed = j.value("run_seed", std::uint64_t{0});
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
    return m;
}

std::string utc_timestamp() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace credrag
