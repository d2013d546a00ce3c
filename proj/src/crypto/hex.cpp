#include "arec/crypto/hex.hpp"

#include <stdexcept>

#include "arec/crypto/digest.hpp"

namespace arec::crypto {
namespace {

constexpr char kDigits[] = "0123456789abcdef";

int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string hex_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

std::vector<std::uint8_t> hex_decode(std::string_view text) {
  if (text.size() % 2 != 0) {
    throw std::invalid_argument("hex text has odd length");
  }
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 2);
  for (std::size_t i = 0; i < text.size(); i += 2) {
    const int hi = nibble(text[i]);
    const int lo = nibble(text[i + 1]);
    if (hi < 0 || lo < 0) {
      throw std::invalid_argument("non-hex character in input");
    }
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

bool is_hex(std::string_view text) {
  for (char c : text) {
    if (nibble(c) < 0) return false;
  }
  return true;
}

Digest128 Digest128::from_hex(std::string_view text) {
  if (text.size() != 32) {
    throw std::invalid_argument("digest must be 32 hex characters");
  }
  const auto raw = hex_decode(text);
  Digest128 d;
  std::copy(raw.begin(), raw.end(), d.bytes.begin());
  return d;
}

std::string Digest128::hex() const { return hex_encode(bytes); }

bool Digest128::has_leading_zero_nibbles(unsigned count) const {
  if (count > 32) return false;
  for (unsigned i = 0; i < count; ++i) {
    const std::uint8_t b = bytes[i / 2];
    const std::uint8_t n = (i % 2 == 0) ? (b >> 4) : (b & 0x0f);
    if (n != 0) return false;
  }
  return true;
}

}  // namespace arec::crypto
