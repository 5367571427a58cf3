#include "http_chat.hpp"

#include <cstdlib>

#include <httplib.h>

namespace credrag::gateway::detail {

namespace {

struct Endpoint {
    std::string origin;
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

/// Chat-completions client: POST {model, messages, temperature, max_tokens},
/// answer read from choices[0].message.content.
class HttpChatBackend final : public Backend {
  public:
    explicit HttpChatBackend(const BackendConfig& c) : config_(c), endpoint_(split_endpoint(c.endpoint)) {}

    std::string generate(const GenerationRequest& request) override {
        httplib::Headers headers;
        if (!config_.auth_env.empty()) {
            const char* token = std::getenv(config_.auth_env.c_str());
            if (token == nullptr || *token == '\0') {
                throw AuthenticationError("environment variable '" + config_.auth_env + "' is not set");
            }
            headers.emplace("Authorization", std::string("Bearer ") + token);
        }

        nlohmann::json body;
        body["model"] = request.model;
        body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}});
        body["temperature"] = request.temperature;
        body["max_tokens"] = request.max_tokens;
        if (request.seed) body["seed"] = *request.seed;

        httplib::Client client(endpoint_.origin);
        auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
        auto usec = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
        client.set_connection_timeout(usec);
        client.set_read_timeout(usec);
        client.set_write_timeout(usec);

        auto res = client.Post(endpoint_.path, headers, body.dump(), "application/json");
        if (!res) throw TransientError("request failed: " + httplib::to_string(res.error()));

        const int status = res->status;
        if (status == 401 || status == 403) {
            throw AuthenticationError("backend rejected credentials (HTTP " + std::to_string(status) + ")");
        }
        if (status == 408 || status == 429 || status >= 500) {
            throw TransientError("HTTP " + std::to_string(status));
        }
        if (status != 200) throw BackendError("HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200));

        try {
            auto j = nlohmann::json::parse(res->body);
            const auto& content = j.at("choices").at(0).at("message").at("content");
            if (!content.is_string()) throw MalformedResponseError("message content is not a string");
            return content.get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw MalformedResponseError(std::string("unexpected response body: ") + e.what());
        }
    }

  private:
    BackendConfig config_;
    Endpoint endpoint_;
};

}  // namespace

std::unique_ptr<Backend> make_http_chat_backend(const BackendConfig& config) {
    return std::make_unique<HttpChatBackend>(config);
}

}  // namespace credrag::gateway::detail
