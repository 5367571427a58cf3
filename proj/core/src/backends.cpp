#include <charconv>

#include "credrag/gateway.hpp"
#include "http_chat.hpp"

namespace credrag::gateway {

std::vector<PromptDocument> parse_prompt_documents(std::string_view prompt) {
    static constexpr std::string_view kQuestion = "Question: ";
    std::size_t begin = 0;
    if (auto pos = prompt.rfind(std::string("\n").append(kQuestion)); pos != std::string_view::npos) {
        begin = pos + 1;
    } else if (!prompt.starts_with(kQuestion)) {
        return {};
    }

    std::vector<PromptDocument> docs;
    std::string_view rest = prompt.substr(begin);
    while (!rest.empty()) {
        auto nl = rest.find('\n');
        std::string_view line = rest.substr(0, nl);
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);

        if (line.starts_with("Text: ")) {
            docs.push_back({std::nullopt, std::string(line.substr(6))});
            continue;
        }
        static constexpr std::string_view kLabelled = " credibility of text: ";
        if (auto pos = line.find(kLabelled); pos != std::string_view::npos) {
            std::string_view label = line.substr(0, pos);
            int level = label == "High" ? 3 : label == "Medium" ? 2 : label == "Low" ? 1 : 0;
            if (level) {
                docs.push_back({level, std::string(line.substr(pos + kLabelled.size()))});
                continue;
            }
        }
        if (line.starts_with("Credibility ")) {
            auto after = line.substr(12);
            int level = 0;
            auto [p, ec] = std::from_chars(after.data(), after.data() + after.size(), level);
            std::string_view tail(p, static_cast<std::size_t>(after.data() + after.size() - p));
            if (ec == std::errc() && tail.starts_with(" of text: ")) {
                docs.push_back({level, std::string(tail.substr(10))});
            }
        }
    }
    return docs;
}

namespace {

class ScriptedMockBackend final : public Backend {
  public:
    explicit ScriptedMockBackend(const BackendConfig& c) : rules_(c.script), fallback_(c.default_response) {}

    std::string generate(const GenerationRequest& request) override {
        for (const auto& rule : rules_) {
            bool hit = rule.match == ScriptRule::Match::Exact ? request.prompt == rule.pattern
                                                              : request.prompt.find(rule.pattern) != std::string::npos;
            if (hit) {
                auto n = static_cast<std::int64_t>(rule.responses.size());
                auto idx = ((request.seed.value_or(0) % n) + n) % n;
                return rule.responses[static_cast<std::size_t>(idx)];
            }
        }
        if (fallback_) return *fallback_;
        throw BackendError("scripted mock has no response for this prompt");
    }

  private:
    std::vector<ScriptRule> rules_;
    std::optional<std::string> fallback_;
};

/// Echoes the first document carrying the highest credibility label. With
/// no labels at all there is nothing to prefer, so it echoes the first one.
class HighestCredibilityOracleBackend final : public Backend {
  public:
    std::string generate(const GenerationRequest& request) override {
        auto docs = parse_prompt_documents(request.prompt);
        const PromptDocument* best = nullptr;
        for (const auto& d : docs) {
            if (!d.level) continue;
            if (!best || *d.level > *best->level) best = &d;
        }
        if (best) return best->text;
        return docs.empty() ? std::string{} : docs.front().text;
    }
};

class FirstDocFollowerBackend final : public Backend {
  public:
    std::string generate(const GenerationRequest& request) override {
        auto docs = parse_prompt_documents(request.prompt);
        return docs.empty() ? std::string{} : docs.front().text;
    }
};

}  // namespace

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
    config.validate();
    switch (config.kind) {
        case BackendKind::HttpChat: return detail::make_http_chat_backend(config);
        case BackendKind::ScriptedMock: return std::make_unique<ScriptedMockBackend>(config);
        case BackendKind::HighestCredibilityOracle: return std::make_unique<HighestCredibilityOracleBackend>();
        case BackendKind::FirstDocFollower: return std::make_unique<FirstDocFollowerBackend>();
    }
    throw ConfigError("unsupported backend kind");
}

}  // namespace credrag::gateway
