#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "credrag/error.hpp"

namespace credrag::gateway {

class BackendError : public Error {
  public:
    using Error::Error;
};

/// Timeouts, connection resets, 429 and 5xx. Retried with backoff.
class TransientError : public BackendError {
  public:
    using BackendError::BackendError;
};

class RetriesExhaustedError : public BackendError {
  public:
    using BackendError::BackendError;
};

class AuthenticationError : public BackendError {
  public:
    using BackendError::BackendError;
};

class MalformedResponseError : public BackendError {
  public:
    using BackendError::BackendError;
};

struct GenerationRequest {
    std::string backend_id;
    std::string model;
    std::string prompt;
    double temperature = 0.01;
    int max_tokens = 512;
    std::optional<std::int64_t> seed;

    /// Throws PreconditionError.
    void validate() const;

    friend bool operator==(const GenerationRequest&, const GenerationRequest&) = default;
};

/// Canonical JSON of every request field, in fixed key order.
nlohmann::ordered_json canonical_json(const GenerationRequest& r);

/// SHA-256 hex of canonical_json(r).
std::string fingerprint(const GenerationRequest& r);

struct Completion {
    std::string text;
    std::string backend_id;
    std::string model;
    std::int64_t latency_ms = 0;
    bool cached = false;
    std::string fingerprint;

    friend bool operator==(const Completion&, const Completion&) = default;
};

nlohmann::ordered_json to_json(const Completion& c);
Completion completion_from_json(const nlohmann::json& j);

enum class BackendKind { HttpChat, ScriptedMock, HighestCredibilityOracle, FirstDocFollower };

std::string to_string(BackendKind k);
BackendKind parse_backend_kind(std::string_view s);

/// One scripted reply rule. With several responses the request seed picks
/// one (seed mod count), so retries and voting trials can differ.
struct ScriptRule {
    enum class Match { Exact, Contains };
    Match match = Match::Exact;
    std::string pattern;
    std::vector<std::string> responses;
};

struct BackendConfig {
    BackendKind kind = BackendKind::ScriptedMock;
    std::string id;
    std::string model;
    std::string endpoint;
    /// Name of the environment variable holding the bearer token.
    std::string auth_env;
    double timeout_seconds = 60.0;
    int max_retries = 3;
    int max_concurrent_requests = 4;
    /// Token-bucket refill rate; zero disables rate limiting.
    double requests_per_second = 0.0;
    int burst = 1;
    int initial_backoff_ms = 500;
    std::vector<ScriptRule> script;
    std::optional<std::string> default_response;

    /// Throws ConfigError.
    void validate() const;
};

nlohmann::ordered_json to_json(const BackendConfig& c);
BackendConfig backend_config_from_json(const nlohmann::json& j);

/// Accepts a JSON file path or one of the shorthands "oracle",
/// "first_doc" and "scripted:<file>".
BackendConfig resolve_backend_config(std::string_view spec);

/// A text generator. Implementations are called concurrently.
class Backend {
  public:
    virtual ~Backend() = default;
    /// Throws TransientError for retryable failures.
    virtual std::string generate(const GenerationRequest& request) = 0;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

/// A document line recovered from a rendered prompt.
struct PromptDocument {
    /// Absent for unlabeled "Text:" lines.
    std::optional<int> level;
    std::string text;
};

/// Document lines of the last question block of a prompt built from the
/// built-in templates.
std::vector<PromptDocument> parse_prompt_documents(std::string_view prompt);

/// Token bucket shared by every gateway with the same backend id.
class RateLimiter {
  public:
    RateLimiter(double rate_per_second, int burst);
    void acquire();

    static std::shared_ptr<RateLimiter> for_backend(const std::string& backend_id, double rate_per_second, int burst);

  private:
    std::mutex mu_;
    double rate_;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
};

/// Thread-safe front for one backend: bounded concurrency, rate limiting
/// and exponential-backoff retries of transient failures.
class Gateway {
  public:
    explicit Gateway(BackendConfig config);
    Gateway(BackendConfig config, std::unique_ptr<Backend> backend);

    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    Completion complete(const GenerationRequest& request);

    [[nodiscard]] const BackendConfig& config() const noexcept { return config_; }
    /// Number of Backend::generate invocations, retries included.
    [[nodiscard]] std::uint64_t backend_calls() const noexcept { return calls_.load(); }

  private:
    BackendConfig config_;
    std::unique_ptr<Backend> backend_;
    std::counting_semaphore<> slots_;
    std::shared_ptr<RateLimiter> limiter_;
    std::atomic<std::uint64_t> calls_{0};
};

/// One-shot convenience wrapper around Gateway.
Completion complete(const GenerationRequest& request, const BackendConfig& config);

/// Directory of {fingerprint}.json entries, each carrying a checksum of
/// its payload. Writes go through write-then-rename.
class ResponseCache {
  public:
    explicit ResponseCache(std::filesystem::path dir);

    /// Corrupt entries are reported and treated as misses.
    std::optional<Completion> get(const std::string& fingerprint) const;
    void put(const Completion& completion);

    /// Cache lookup with single-flight: concurrent misses for the same
    /// fingerprint run `compute` once and all callers share the result.
    Completion get_or_compute(const std::string& fingerprint, const std::function<Completion()>& compute);

    [[nodiscard]] std::filesystem::path path_for(const std::string& fingerprint) const;
    [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }

  private:
    std::filesystem::path dir_;
    std::mutex mu_;
    std::map<std::string, std::shared_future<Completion>> inflight_;
};

/// Serves `request` from `cache`, delegating misses to `gateway`.
Completion cached_complete(const GenerationRequest& request, Gateway& gateway, ResponseCache& cache);

}  // namespace credrag::gateway
