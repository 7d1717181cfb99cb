#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace citygen {

// Lower-case hex SHA-256 digest.
std::string sha256Hex(std::span<const std::uint8_t> bytes);
std::string sha256Hex(std::string_view text);

}  // namespace citygen
