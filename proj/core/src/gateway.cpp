#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include <spdlog/spdlog.h>

#include "credrag/dataset_io.hpp"
#include "credrag/gateway.hpp"
#include "credrag/hash.hpp"

namespace credrag::gateway {

void GenerationRequest::validate() const {
    if (prompt.empty()) throw PreconditionError("generation request has an empty prompt");
    if (!std::isfinite(temperature) || temperature < 0.0) {
        throw PreconditionError("temperature must be finite and >= 0");
    }
    if (max_tokens < 1) throw PreconditionError("max_tokens must be >= 1");
}

nlohmann::ordered_json canonical_json(const GenerationRequest& r) {
    nlohmann::ordered_json j;
    j["backend_id"] = r.backend_id;
    j["model"] = r.model;
    j["prompt"] = r.prompt;
    j["temperature"] = r.temperature;
    j["max_tokens"] = r.max_tokens;
    j["seed"] = r.seed ? nlohmann::ordered_json(*r.seed) : nlohmann::ordered_json(nullptr);
    return j;
}

std::string fingerprint(const GenerationRequest& r) { return sha256_hex(canonical_json(r).dump()); }

nlohmann::ordered_json to_json(const Completion& c) {
    nlohmann::ordered_json j;
    j["text"] = c.text;
    j["backend_id"] = c.backend_id;
    j["model"] = c.model;
    j["latency_ms"] = c.latency_ms;
    j["cached"] = c.cached;
    j["fingerprint"] = c.fingerprint;
    return j;
}

Completion completion_from_json(const nlohmann::json& j) {
    Completion c;
    c.text = j.at("text").get<std::string>();
    c.backend_id = j.at("backend_id").get<std::string>();
    c.model = j.at("model").get<std::string>();
    c.latency_ms = j.at("latency_ms").get<std::int64_t>();
    c.cached = j.at("cached").get<bool>();
    c.fingerprint = j.at("fingerprint").get<std::string>();
    return c;
}

std::string to_string(BackendKind k) {
    switch (k) {
        case BackendKind::HttpChat: return "http_chat";
        case BackendKind::ScriptedMock: return "scripted_mock";
        case BackendKind::HighestCredibilityOracle: return "highest_credibility_oracle";
        case BackendKind::FirstDocFollower: return "first_doc_follower";
    }
    return "unknown";
}

BackendKind parse_backend_kind(std::string_view s) {
    if (s == "http_chat") return BackendKind::HttpChat;
    if (s == "scripted_mock" || s == "scripted") return BackendKind::ScriptedMock;
    if (s == "highest_credibility_oracle" || s == "oracle") return BackendKind::HighestCredibilityOracle;
    if (s == "first_doc_follower" || s == "first_doc") return BackendKind::FirstDocFollower;
    throw ConfigError("unknown backend kind '" + std::string(s) + "'");
}

void BackendConfig::validate() const {
    if (id.empty()) throw ConfigError("backend id is empty");
    if (kind == BackendKind::HttpChat) {
        if (endpoint.empty()) throw ConfigError("http_chat backend '" + id + "' requires an endpoint");
        if (!endpoint.starts_with("http://") && !endpoint.starts_with("https://")) {
            throw ConfigError("endpoint must start with http:// or https://");
        }
    }
    if (timeout_seconds <= 0.0) throw ConfigError("timeout_seconds must be > 0");
    if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
    if (max_concurrent_requests < 1) throw ConfigError("max_concurrent_requests must be >= 1");
    if (requests_per_second < 0.0) throw ConfigError("requests_per_second must be >= 0");
    if (burst < 1) throw ConfigError("burst must be >= 1");
    if (initial_backoff_ms < 0) throw ConfigError("initial_backoff_ms must be >= 0");
    for (const auto& rule : script) {
        if (rule.responses.empty()) throw ConfigError("script rule '" + rule.pattern + "' has no responses");
    }
}

nlohmann::ordered_json to_json(const BackendConfig& c) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(c.kind);
    j["id"] = c.id;
    j["model"] = c.model;
    if (!c.endpoint.empty()) j["endpoint"] = c.endpoint;
    if (!c.auth_env.empty()) j["auth_env"] = c.auth_env;
    j["timeout_seconds"] = c.timeout_seconds;
    j["max_retries"] = c.max_retries;
    j["max_concurrent_requests"] = c.max_concurrent_requests;
    j["requests_per_second"] = c.requests_per_second;
    j["burst"] = c.burst;
    j["initial_backoff_ms"] = c.initial_backoff_ms;
    if (!c.script.empty()) {
        auto rules = nlohmann::ordered_json::array();
        for (const auto& r : c.script) {
            nlohmann::ordered_json rj;
            rj[r.match == ScriptRule::Match::Exact ? "prompt" : "contains"] = r.pattern;
            rj["responses"] = r.responses;
            rules.push_back(std::move(rj));
        }
        j["script"] = std::move(rules);
    }
    if (c.default_response) j["default_response"] = *c.default_response;
    return j;
}

BackendConfig backend_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("backend config must be a JSON object");
    BackendConfig c;
    try {
        c.kind = parse_backend_kind(j.at("kind").get<std::string>());
        c.id = j.value("id", to_string(c.kind));
        c.model = j.value("model", c.id);
        c.endpoint = j.value("endpoint", "");
        c.auth_env = j.value("auth_env", "");
        c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
        c.max_retries = j.value("max_retries", c.max_retries);
        c.max_concurrent_requests = j.value("max_concurrent_requests", c.max_concurrent_requests);
        c.requests_per_second = j.value("requests_per_second", c.requests_per_second);
        c.burst = j.value("burst", c.burst);
        c.initial_backoff_ms = j.value("initial_backoff_ms", c.initial_backoff_ms);
        if (j.contains("script")) {
            for (const auto& rj : j["script"]) {
                ScriptRule r;
                if (rj.contains("prompt")) {
                    r.pattern = rj["prompt"].get<std::string>();
                } else {
                    r.match = ScriptRule::Match::Contains;
                    r.pattern = rj.at("contains").get<std::string>();
                }
                if (rj.contains("response")) r.responses.push_back(rj["response"].get<std::string>());
                if (rj.contains("responses")) {
                    for (const auto& s : rj["responses"]) r.responses.push_back(s.get<std::string>());
                }
                c.script.push_back(std::move(r));
            }
        }
        if (j.contains("default_response") && !j["default_response"].is_null()) {
            c.default_response = j["default_response"].get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed backend config: ") + e.what());
    }
    c.validate();
    return c;
}

BackendConfig resolve_backend_config(std::string_view spec) {
    if (spec == "oracle" || spec == "highest_credibility_oracle") {
        return backend_config_from_json({{"kind", "highest_credibility_oracle"}});
    }
    if (spec == "first_doc" || spec == "first_doc_follower") {
        return backend_config_from_json({{"kind", "first_doc_follower"}});
    }
    std::filesystem::path path(spec);
    bool scripted = false;
    if (spec.starts_with("scripted:")) {
        path = std::string(spec.substr(9));
        scripted = true;
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("malformed backend file '" + path.string() + "': " + e.what());
    }
    if (scripted && !j.contains("kind")) j["kind"] = "scripted_mock";
    return backend_config_from_json(j);
}

RateLimiter::RateLimiter(double rate_per_second, int burst)
    : rate_(rate_per_second), capacity_(burst), tokens_(burst), last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    if (rate_ <= 0.0) return;
    std::unique_lock lock(mu_);
    while (true) {
        auto now = std::chrono::steady_clock::now();
        double elapsed = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
        lock.unlock();
        std::this_thread::sleep_for(wait);
        lock.lock();
    }
}

std::shared_ptr<RateLimiter> RateLimiter::for_backend(const std::string& backend_id, double rate_per_second,
                                                      int burst) {
    static std::mutex mu;
    static std::map<std::string, std::shared_ptr<RateLimiter>> registry;
    std::lock_guard lock(mu);
    auto& slot = registry[backend_id];
    if (!slot) slot = std::make_shared<RateLimiter>(rate_per_second, burst);
    return slot;
}

Gateway::Gateway(BackendConfig config) : Gateway(config, make_backend(config)) {}

Gateway::Gateway(BackendConfig config, std::unique_ptr<Backend> backend)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      slots_(std::max(config_.max_concurrent_requests, 1)),
      limiter_(RateLimiter::for_backend(config_.id, config_.requests_per_second, config_.burst)) {
    config_.validate();
}

Completion Gateway::complete(const GenerationRequest& request) {
    request.validate();
    const auto start = std::chrono::steady_clock::now();
    std::string text;
    for (int attempt = 0;; ++attempt) {
        limiter_->acquire();
        try {
            slots_.acquire();
            struct Release {
                std::counting_semaphore<>& s;
                ~Release() { s.release(); }
            } release{slots_};
            calls_.fetch_add(1);
            text = backend_->generate(request);
            break;
        } catch (const TransientError& e) {
            if (attempt >= config_.max_retries) {
                throw RetriesExhaustedError("backend '" + config_.id + "' failed after " +
                                            std::to_string(attempt + 1) + " attempts: " + e.what());
            }
            auto delay = std::min<std::int64_t>(static_cast<std::int64_t>(config_.initial_backoff_ms) << attempt, 30000);
            spdlog::warn("backend '{}' transient failure ({}); retry {} in {} ms", config_.id, e.what(), attempt + 1,
                         delay);
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
    }
    Completion c;
    c.text = std::move(text);
    c.backend_id = request.backend_id;
    c.model = request.model;
    c.latency_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    c.cached = false;
    c.fingerprint = fingerprint(request);
    return c;
}

Completion complete(const GenerationRequest& request, const BackendConfig& config) {
    Gateway gw(config);
    return gw.complete(request);
}

Completion cached_complete(const GenerationRequest& request, Gateway& gateway, ResponseCache& cache) {
    return cache.get_or_compute(fingerprint(request), [&] { return gateway.complete(request); });
}

}  // namespace credrag::gateway
