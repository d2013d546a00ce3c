#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "arec/ledger/types.hpp"

namespace arec::ledger {

enum class MiningKernel { Serial, Parallel };

// Nonce search over [start, start + limit). Both kernels return the smallest
// qualifying nonce in the range, so they are interchangeable.
std::optional<std::uint64_t> search_nonce_serial(std::string_view header_prefix, unsigned difficulty,
                                                 std::uint64_t start, std::uint64_t limit);

std::optional<std::uint64_t> search_nonce_parallel(std::string_view header_prefix, unsigned difficulty,
                                                   std::uint64_t start, std::uint64_t limit);

struct NodeSim {
  std::uint32_t node_id = 0;
  Address address;
  Chain chain;
  std::uint64_t rng_seed = 0;
};

/// Assemble and mine a block on top of `parent`. The nonce search starts at
/// zero, so difficulty 0 always yields nonce 0.
Block mine_block(const NodeSim& node, std::vector<Transaction> txs, const Block& parent,
                 unsigned difficulty, std::uint64_t timestamp,
                 MiningKernel kernel = MiningKernel::Parallel);

Block mine_header(BlockHeader header, std::vector<Transaction> txs, unsigned difficulty,
                  MiningKernel kernel = MiningKernel::Parallel);

}  // namespace arec::ledger
