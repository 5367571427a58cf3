#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace credrag {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// First eight digest bytes as a big-endian integer; used to derive seeds.
std::uint64_t sha256_u64(std::string_view data);

}  // namespace credrag
