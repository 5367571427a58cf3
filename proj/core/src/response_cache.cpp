#include <spdlog/spdlog.h>

#include "credrag/dataset_io.hpp"
#include "credrag/gateway.hpp"
#include "credrag/hash.hpp"

namespace credrag::gateway {

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_)) {
        throw IoError("cache directory '" + dir_.string() + "' is not writable");
    }
}

std::filesystem::path ResponseCache::path_for(const std::string& fingerprint) const {
    return dir_ / (fingerprint + ".json");
}

std::optional<Completion> ResponseCache::get(const std::string& fingerprint) const {
    auto path = path_for(fingerprint);
    if (!std::filesystem::exists(path)) return std::nullopt;
    try {
        auto j = nlohmann::json::parse(read_file(path));
        const auto& payload = j.at("completion");
        if (j.at("checksum").get<std::string>() != sha256_hex(payload.dump())) {
            throw Error("checksum mismatch");
        }
        Completion c = completion_from_json(payload);
        if (c.fingerprint != fingerprint) throw Error("fingerprint mismatch");
        c.cached = true;
        return c;
    } catch (const std::exception& e) {
        spdlog::warn("cache entry '{}' is corrupt ({}); recomputing", path.string(), e.what());
        return std::nullopt;
    }
}

void ResponseCache::put(const Completion& completion) {
    Completion stored = completion;
    stored.cached = false;
    // Parse back so the checksum covers the same serialization get() sees.
    auto payload = nlohmann::json::parse(to_json(stored).dump());
    nlohmann::ordered_json j;
    j["fingerprint"] = stored.fingerprint;
    j["checksum"] = sha256_hex(payload.dump());
    j["completion"] = payload;
    write_file_atomic(path_for(stored.fingerprint), j.dump(2) + "\n");
}

Completion ResponseCache::get_or_compute(const std::string& fingerprint, const std::function<Completion()>& compute) {
    std::promise<Completion> promise;
    std::shared_future<Completion> future;
    bool leader = false;
    {
        std::lock_guard lock(mu_);
        if (auto it = inflight_.find(fingerprint); it != inflight_.end()) {
            future = it->second;
        } else {
            if (auto hit = get(fingerprint)) return *hit;
            future = promise.get_future().share();
            inflight_.emplace(fingerprint, future);
            leader = true;
        }
    }
    if (!leader) return future.get();

    try {
        Completion c = compute();
        put(c);
        promise.set_value(c);
    } catch (...) {
        promise.set_exception(std::current_exception());
    }
    {
        std::lock_guard lock(mu_);
        inflight_.erase(fingerprint);
    }
    return future.get();
}

}  // namespace credrag::gateway
