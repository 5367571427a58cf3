#include "credrag/log.hpp"

#include <string>

#include <spdlog/spdlog.h>

#include "credrag/error.hpp"

namespace credrag {

LogLevel parse_log_level(std::string_view s) {
    if (s == "debug") return LogLevel::Debug;
    if (s == "info") return LogLevel::Info;
    if (s == "warn") return LogLevel::Warn;
    if (s == "error") return LogLevel::Error;
    if (s == "off") return LogLevel::Off;
    throw ConfigError("unknown log level '" + std::string(s) + "'");
}

void set_log_level(LogLevel level) {
    switch (level) {
        case LogLevel::Debug: spdlog::set_level(spdlog::level::debug); break;
        case LogLevel::Info: spdlog::set_level(spdlog::level::info); break;
        case LogLevel::Warn: spdlog::set_level(spdlog::level::warn); break;
        case LogLevel::Error: spdlog::set_level(spdlog::level::err); break;
        case LogLevel::Off: spdlog::set_level(spdlog::level::off); break;
    }
}

}  // namespace credrag
