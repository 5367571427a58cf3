#pragma once

#include <string_view>

namespace credrag {

enum class LogLevel { Debug, Info, Warn, Error, Off };

/// Accepts debug, info, warn, error and off. Throws ConfigError.
LogLevel parse_log_level(std::string_view s);

/// Threshold for the toolkit's diagnostics on stderr. Default: Info.
void set_log_level(LogLevel level);

}  // namespace credrag
