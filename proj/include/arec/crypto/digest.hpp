#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace arec::crypto {

/// 128-bit MD5 fingerprint. The canonical text form is 32 lowercase hex chars.
struct Digest128 {
  std::array<std::uint8_t, 16> bytes{};

  static Digest128 zero() { return {}; }

  /// Throws std::invalid_argument unless `text` is exactly 32 hex characters.
  static Digest128 from_hex(std::string_view text);

  std::string hex() const;

  bool has_leading_zero_nibbles(unsigned count) const;

  friend bool operator==(const Digest128&, const Digest128&) = default;
  friend auto operator<=>(const Digest128&, const Digest128&) = default;
};

}  // namespace arec::crypto

template <>
struct std::hash<arec::crypto::Digest128> {
  std::size_t operator()(const arec::crypto::Digest128& d) const noexcept {
    std::size_t h = 0;
    for (int i = 0; i < 8; ++i) h = (h << 8) | d.bytes[i];
    return h;
  }
};
