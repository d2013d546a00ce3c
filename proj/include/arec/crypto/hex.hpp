#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace arec::crypto {

std::string hex_encode(std::span<const std::uint8_t> bytes);

/// Accepts upper or lower case. Throws std::invalid_argument on odd length or
/// a non-hex character.
std::vector<std::uint8_t> hex_decode(std::string_view text);

bool is_hex(std::string_view text);

}  // namespace arec::crypto
