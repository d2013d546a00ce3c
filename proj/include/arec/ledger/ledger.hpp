#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "arec/ledger/chain.hpp"
#include "arec/ledger/mempool.hpp"
#include "arec/ledger/mining.hpp"
#include "arec/ledger/types.hpp"

namespace arec::ledger {

struct LedgerConfig {
  ChainParams chain;
  std::size_t node_count = 3;
  std::uint64_t seed = 0;
  MiningKernel kernel = MiningKernel::Parallel;
};

struct RoundReport {
  std::uint32_t winner = 0;
  Block block;
  std::uint64_t fees = 0;
};

/// The simulated network: replica nodes, shared mempool, wallets and the
/// canonical chain. Single writer; callers serialize access.
class Ledger {
 public:
  explicit Ledger(LedgerConfig config);

  const LedgerConfig& config() const { return config_; }
  const Chain& chain() const { return nodes_.front().chain; }
  std::span<const NodeSim> nodes() const { return nodes_; }
  const Mempool& pool() const { return pool_; }
  const WalletBook& wallets() const { return wallets_; }
  std::uint64_t tick() const { return tick_; }

  TxStatus submit(const Transaction& tx);

  /// Seeded lottery picks a miner, which mines the highest-fee transactions;
  /// every other node verifies and appends. Fees go to the winner's wallet.
  /// Throws std::logic_error (and changes nothing) if any replica rejects.
  RoundReport run_round();

  TxStatus status(const Digest128& tx_id) const;

  /// Test-only funding. The only operation that creates balance.
  void faucet(const Address& to, std::uint64_t amount);

  /// Wallets, pool, statuses, tick and lottery state. The chain itself is
  /// persisted separately as JSON lines.
  nlohmann::json snapshot() const;
  static Ledger restore(LedgerConfig config, Chain chain, const nlohmann::json& snapshot);

 private:
  void index_block(const Block& block);

  LedgerConfig config_;
  std::vector<NodeSim> nodes_;
  Mempool pool_;
  WalletBook wallets_;
  std::unordered_map<Digest128, std::uint64_t> confirmed_at_;  // tx_id -> block index
  std::unordered_map<Digest128, std::string> rejected_;
  std::uint64_t tick_ = 0;
  std::mt19937_64 lottery_;
};

/// Free-function form of a mining round over an explicit node set.
RoundReport run_round(std::vector<NodeSim>& network, Mempool& pool, WalletBook& wallets,
                      const ChainParams& params, std::uint64_t timestamp, std::mt19937_64& lottery,
                      MiningKernel kernel = MiningKernel::Parallel);

TxStatus confirmation_status(const Ledger& ledger, const Digest128& tx_id);

}  // namespace arec::ledger
