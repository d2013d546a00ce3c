#include "arec/ledger/types.hpp"

#include <stdexcept>

#include "arec/crypto/hex.hpp"
#include "arec/crypto/md5.hpp"

namespace arec::ledger {

Address Address::from_hex(std::string_view text) {
  if (text.size() != 40) throw std::invalid_argument("address must be 40 hex characters");
  const auto raw = crypto::hex_decode(text);
  Address a;
  std::copy(raw.begin(), raw.end(), a.bytes.begin());
  return a;
}

Address Address::derive(std::string_view material) {
  const auto head = crypto::md5_digest(material);
  const auto tail = crypto::md5_digest(head.bytes);
  Address a;
  std::copy(head.bytes.begin(), head.bytes.end(), a.bytes.begin());
  std::copy(tail.bytes.begin(), tail.bytes.begin() + 4, a.bytes.begin() + 16);
  return a;
}

std::string Address::hex() const { return crypto::hex_encode(bytes); }

void ChainParams::validate() const {
  if (difficulty > kMaxDifficulty) {
    throw std::invalid_argument("difficulty must be between 0 and 6");
  }
  if (capacity < 1) throw std::invalid_argument("block capacity must be at least 1");
}

Transaction Transaction::make(const Address& sender, const Address& target, std::string payload,
                              std::uint64_t gas_fee) {
  Transaction tx{sender, target, std::move(payload), gas_fee, {}};
  tx.tx_id = tx.compute_id();
  return tx;
}

std::string Transaction::canonical() const {
  std::string out;
  out.reserve(40 + 40 + payload.size() + 24);
  out += sender.hex();
  out += '|';
  out += target.hex();
  out += '|';
  out += payload;
  out += '|';
  out += std::to_string(gas_fee);
  return out;
}

Digest128 Transaction::compute_id() const { return crypto::md5_digest(canonical()); }

std::string BlockHeader::canonical_prefix() const {
  std::string out;
  out.reserve(96);
  out += std::to_string(index);
  out += '|';
  out += std::to_string(timestamp);
  out += '|';
  out += prev_hash.hex();
  out += '|';
  out += tx_root.hex();
  out += '|';
  return out;
}

std::string BlockHeader::canonical() const { return canonical_prefix() + std::to_string(nonce); }

std::string TxStatus::label() const {
  switch (kind) {
    case Kind::Pending:
      return "pending";
    case Kind::Confirmed:
      return "confirmed";
    case Kind::Rejected:
      return "rejected";
  }
  return "rejected";
}

}  // namespace arec::ledger
