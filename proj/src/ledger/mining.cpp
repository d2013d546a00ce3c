#include "arec/ledger/mining.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <stdexcept>

#include <omp.h>

#include "arec/crypto/md5.hpp"
#include "arec/ledger/chain.hpp"

namespace arec::ledger {
namespace {

bool nonce_meets(std::string_view prefix, std::uint64_t nonce, unsigned difficulty) {
  char digits[24];
  auto [end, ec] = std::to_chars(digits, digits + sizeof(digits), nonce);
  (void)ec;
  crypto::Md5 h;
  h.update(prefix);
  h.update(std::string_view(digits, static_cast<std::size_t>(end - digits)));
  return h.finish().has_leading_zero_nibbles(difficulty);
}

// Nonces scanned per parallel sweep. Large enough to amortize the fork/join,
// small enough that work past the answer stays bounded.
constexpr std::uint64_t kSweep = 1 << 14;

}  // namespace

std::optional<std::uint64_t> search_nonce_serial(std::string_view header_prefix, unsigned difficulty,
                                                 std::uint64_t start, std::uint64_t limit) {
  for (std::uint64_t i = 0; i < limit; ++i) {
    if (nonce_meets(header_prefix, start + i, difficulty)) return start + i;
  }
  return std::nullopt;
}

std::optional<std::uint64_t> search_nonce_parallel(std::string_view header_prefix, unsigned difficulty,
                                                   std::uint64_t start, std::uint64_t limit) {
  constexpr std::uint64_t kNone = std::numeric_limits<std::uint64_t>::max();
  for (std::uint64_t base = 0; base < limit; base += kSweep) {
    const auto span = static_cast<std::int64_t>(std::min(kSweep, limit - base));
    std::uint64_t best = kNone;
#pragma omp parallel for schedule(static) reduction(min : best)
    for (std::int64_t i = 0; i < span; ++i) {
      const std::uint64_t offset = base + static_cast<std::uint64_t>(i);
      if (offset < best && nonce_meets(header_prefix, start + offset, difficulty)) best = offset;
    }
    if (best != kNone) return start + best;
  }
  return std::nullopt;
}

Block mine_header(BlockHeader header, std::vector<Transaction> txs, unsigned difficulty,
                  MiningKernel kernel) {
  if (difficulty > ChainParams::kMaxDifficulty) throw std::invalid_argument("difficulty out of range");
  const std::string prefix = header.canonical_prefix();
  constexpr auto kAll = std::numeric_limits<std::uint64_t>::max();
  const auto nonce = kernel == MiningKernel::Serial ? search_nonce_serial(prefix, difficulty, 0, kAll)
                                                    : search_nonce_parallel(prefix, difficulty, 0, kAll);
  // At difficulty <= 6 the search space is never exhausted in practice.
  header.nonce = nonce.value();
  Block block{header, std::move(txs), {}};
  block.hash = block_hash(block.header);
  return block;
}

Block mine_block([[maybe_unused]] const NodeSim& node, std::vector<Transaction> txs, const Block& parent,
                 unsigned difficulty, std::uint64_t timestamp, MiningKernel kernel) {
  BlockHeader header;
  header.index = parent.header.index + 1;
  header.timestamp = std::max(timestamp, parent.header.timestamp);
  header.prev_hash = parent.hash;
  header.tx_root = compute_tx_root(txs);
  return mine_header(header, std::move(txs), difficulty, kernel);
}

}  // namespace arec::ledger
