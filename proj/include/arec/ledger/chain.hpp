#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "arec/ledger/types.hpp"

namespace arec::ledger {

Digest128 block_hash(const BlockHeader& header);

/// md5 over the concatenated tx_id hex strings, in block order.
Digest128 compute_tx_root(std::span<const Transaction> txs);

enum class BlockFault {
  None,
  BadLink,
  BadIndex,
  BadTimestamp,
  BadHash,
  TargetMissed,
  OverCapacity,
  BadTxRoot,
  BadTxId,
  BadGenesis,
};

std::string_view fault_name(BlockFault fault);

struct BlockVerdict {
  BlockFault fault = BlockFault::None;
  explicit operator bool() const { return fault == BlockFault::None; }
};

BlockVerdict verify_block(const Block& block, const Block& parent, const ChainParams& params);

/// Genesis: index 0, timestamp 0, zero prev_hash, no transactions, mined at
/// the configured difficulty. Throws std::invalid_argument on bad params.
Block make_genesis(const ChainParams& params);
Chain create_genesis(const ChainParams& params);

struct ChainVerdict {
  BlockFault fault = BlockFault::None;
  std::size_t block_index = 0;  // first failing block
  explicit operator bool() const { return fault == BlockFault::None; }
};

ChainVerdict check_chain(const Chain& chain, const ChainParams& params);

inline bool validate_chain(const Chain& chain, const ChainParams& params) {
  return static_cast<bool>(check_chain(chain, params));
}

}  // namespace arec::ledger
