#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "arec/crypto/digest.hpp"

namespace arec::ledger {

using crypto::Digest128;

/// 20-octet account or contract address.
struct Address {
  std::array<std::uint8_t, 20> bytes{};

  static Address from_hex(std::string_view text);

  /// Deterministic address from arbitrary material: md5(material) followed by
  /// the first four octets of md5(md5(material)).
  static Address derive(std::string_view material);

  std::string hex() const;

  friend bool operator==(const Address&, const Address&) = default;
  friend auto operator<=>(const Address&, const Address&) = default;
};

struct ChainParams {
  unsigned difficulty = 3;     // leading zero hex nibbles, 0..6
  std::size_t capacity = 4;    // transactions per block

  static constexpr unsigned kMaxDifficulty = 6;

  /// Throws std::invalid_argument when out of range.
  void validate() const;
};

// A fee-bearing call addressed to the contract. `payload` holds the canonical
// JSON of the call; the ledger never interprets it.
struct Transaction {
  Address sender;
  Address target;
  std::string payload;
  std::uint64_t gas_fee = 1;
  Digest128 tx_id;

  static Transaction make(const Address& sender, const Address& target, std::string payload,
                          std::uint64_t gas_fee);

  // sender_hex|target_hex|payload|gas_fee
  std::string canonical() const;
  Digest128 compute_id() const;

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

struct BlockHeader {
  std::uint64_t index = 0;
  std::uint64_t timestamp = 0;
  Digest128 prev_hash;
  Digest128 tx_root;
  std::uint64_t nonce = 0;

  // index|timestamp|prev_hash|tx_root|nonce
  std::string canonical() const;
  // Everything up to and including the separator before the nonce.
  std::string canonical_prefix() const;

  friend bool operator==(const BlockHeader&, const BlockHeader&) = default;
};

struct Block {
  BlockHeader header;
  std::vector<Transaction> transactions;
  Digest128 hash;

  friend bool operator==(const Block&, const Block&) = default;
};

struct Chain {
  std::vector<Block> blocks;

  const Block& tip() const { return blocks.back(); }
  std::size_t size() const { return blocks.size(); }

  friend bool operator==(const Chain&, const Chain&) = default;
};

struct TxStatus {
  enum class Kind { Pending, Confirmed, Rejected };

  Kind kind = Kind::Rejected;
  std::uint64_t block_index = 0;  // Confirmed only
  std::uint64_t depth = 0;        // Confirmed only
  std::string reason;             // Rejected only

  static TxStatus pending() { return {Kind::Pending, 0, 0, {}}; }
  static TxStatus confirmed(std::uint64_t index, std::uint64_t depth) {
    return {Kind::Confirmed, index, depth, {}};
  }
  static TxStatus rejected(std::string why) { return {Kind::Rejected, 0, 0, std::move(why)}; }

  bool is_pending() const { return kind == Kind::Pending; }
  bool is_confirmed() const { return kind == Kind::Confirmed; }
  bool is_rejected() const { return kind == Kind::Rejected; }

  std::string label() const;

  friend bool operator==(const TxStatus&, const TxStatus&) = default;
};

}  // namespace arec::ledger

template <>
struct std::hash<arec::ledger::Address> {
  std::size_t operator()(const arec::ledger::Address& a) const noexcept {
    std::size_t h = 0;
    for (int i = 0; i < 8; ++i) h = (h << 8) | a.bytes[i];
    return h;
  }
};
