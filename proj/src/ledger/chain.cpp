#include "arec/ledger/chain.hpp"

#include "arec/crypto/md5.hpp"
#include "arec/ledger/mining.hpp"

namespace arec::ledger {

Digest128 block_hash(const BlockHeader& header) { return crypto::md5_digest(header.canonical()); }

Digest128 compute_tx_root(std::span<const Transaction> txs) {
  crypto::Md5 h;
  for (const auto& tx : txs) h.update(tx.tx_id.hex());
  return h.finish();
}

std::string_view fault_name(BlockFault fault) {
  switch (fault) {
    case BlockFault::None:
      return "ok";
    case BlockFault::BadLink:
      return "prev_hash does not link to parent";
    case BlockFault::BadIndex:
      return "index is not parent index + 1";
    case BlockFault::BadTimestamp:
      return "timestamp precedes parent";
    case BlockFault::BadHash:
      return "hash does not match header";
    case BlockFault::TargetMissed:
      return "hash misses difficulty target";
    case BlockFault::OverCapacity:
      return "too many transactions";
    case BlockFault::BadTxRoot:
      return "tx_root does not match transactions";
    case BlockFault::BadTxId:
      return "tx_id does not match transaction";
    case BlockFault::BadGenesis:
      return "genesis block is not canonical";
  }
  return "unknown";
}

namespace {

BlockFault check_body(const Block& block, const ChainParams& params) {
  if (block.transactions.size() > params.capacity) return BlockFault::OverCapacity;
  for (const auto& tx : block.transactions) {
    if (tx.compute_id() != tx.tx_id) return BlockFault::BadTxId;
  }
  if (compute_tx_root(block.transactions) != block.header.tx_root) return BlockFault::BadTxRoot;
  if (block_hash(block.header) != block.hash) return BlockFault::BadHash;
  if (!block.hash.has_leading_zero_nibbles(params.difficulty)) return BlockFault::TargetMissed;
  return BlockFault::None;
}

}  // namespace

BlockVerdict verify_block(const Block& block, const Block& parent, const ChainParams& params) {
  if (block.header.prev_hash != parent.hash) return {BlockFault::BadLink};
  if (block.header.index != parent.header.index + 1) return {BlockFault::BadIndex};
  if (block.header.timestamp < parent.header.timestamp) return {BlockFault::BadTimestamp};
  return {check_body(block, params)};
}

Block make_genesis(const ChainParams& params) {
  params.validate();
  BlockHeader header;
  header.tx_root = compute_tx_root({});
  return mine_header(header, {}, params.difficulty, MiningKernel::Serial);
}

Chain create_genesis(const ChainParams& params) { return Chain{{make_genesis(params)}}; }

ChainVerdict check_chain(const Chain& chain, const ChainParams& params) {
  if (chain.blocks.empty()) return {BlockFault::BadGenesis, 0};
  const Block& genesis = chain.blocks.front();
  const auto& gh = genesis.header;
  if (gh.index != 0 || gh.timestamp != 0 || gh.prev_hash != Digest128::zero() ||
      !genesis.transactions.empty()) {
    return {BlockFault::BadGenesis, 0};
  }
  if (auto fault = check_body(genesis, params); fault != BlockFault::None) return {fault, 0};

  for (std::size_t i = 1; i < chain.blocks.size(); ++i) {
    const auto verdict = verify_block(chain.blocks[i], chain.blocks[i - 1], params);
    if (!verdict) return {verdict.fault, i};
  }
  return {};
}

}  // namespace arec::ledger
