#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "arec/crypto/digest.hpp"

namespace arec::crypto {

// Incremental MD5 (RFC 1321).
class Md5 {
 public:
  Md5();

  Md5& update(std::span<const std::uint8_t> data);
  Md5& update(std::string_view text);

  // The hasher must not be updated after finish().
  Digest128 finish();

 private:
  void compress(const std::uint8_t* block);

  std::array<std::uint32_t, 4> state_;
  std::array<std::uint8_t, 64> buffer_{};
  std::uint64_t length_ = 0;  // bytes consumed so far
};

Digest128 md5_digest(std::span<const std::uint8_t> message);
Digest128 md5_digest(std::string_view message);

}  // namespace arec::crypto
