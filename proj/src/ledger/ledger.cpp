#include "arec/ledger/ledger.hpp"

#include <sstream>
#include <stdexcept>

#include "arec/crypto/hex.hpp"

namespace arec::ledger {

RoundReport run_round(std::vector<NodeSim>& network, Mempool& pool, WalletBook& wallets,
                      const ChainParams& params, std::uint64_t timestamp, std::mt19937_64& lottery,
                      MiningKernel kernel) {
  if (network.empty()) throw std::invalid_argument("a round needs at least one node");

  const auto winner = static_cast<std::size_t>(lottery() % network.size());
  const NodeSim& miner = network[winner];
  auto txs = pool.select(params.capacity);
  Block block = mine_block(miner, std::move(txs), miner.chain.tip(), params.difficulty, timestamp, kernel);

  // Every replica must accept before any of them appends.
  for (const auto& node : network) {
    const auto verdict = verify_block(block, node.chain.tip(), params);
    if (!verdict) {
      throw std::logic_error("node " + std::to_string(node.node_id) +
                             " rejected broadcast block: " + std::string(fault_name(verdict.fault)));
    }
  }
  for (auto& node : network) node.chain.blocks.push_back(block);

  const std::uint64_t fees = pool.remove(block.transactions);
  wallets.credit(miner.address, fees);
  return RoundReport{miner.node_id, std::move(block), fees};
}

Ledger::Ledger(LedgerConfig config) : config_(config), lottery_(config.seed) {
  config_.chain.validate();
  if (config_.node_count < 1) throw std::invalid_argument("node_count must be at least 1");
  const Chain genesis = create_genesis(config_.chain);
  for (std::size_t i = 0; i < config_.node_count; ++i) {
    NodeSim node;
    node.node_id = static_cast<std::uint32_t>(i);
    node.address = Address::derive("node-" + std::to_string(i));
    node.chain = genesis;
    node.rng_seed = config_.seed + i;
    nodes_.push_back(std::move(node));
  }
}

TxStatus Ledger::submit(const Transaction& tx) {
  auto status = submit_transaction(pool_, wallets_, tx);
  if (status.is_rejected()) {
    // A later successful resubmission supersedes the rejection.
    if (status.reason != "duplicate") rejected_[tx.tx_id] = status.reason;
  } else {
    rejected_.erase(tx.tx_id);
  }
  return status;
}

RoundReport Ledger::run_round() {
  auto report = ledger::run_round(nodes_, pool_, wallets_, config_.chain, tick_ + 1, lottery_, config_.kernel);
  ++tick_;
  index_block(report.block);
  return report;
}

void Ledger::index_block(const Block& block) {
  for (const auto& tx : block.transactions) {
    confirmed_at_[tx.tx_id] = block.header.index;
    pool_.mark_seen(tx.tx_id);
  }
}

TxStatus Ledger::status(const Digest128& tx_id) const {
  if (pool_.contains(tx_id)) return TxStatus::pending();
  if (auto it = confirmed_at_.find(tx_id); it != confirmed_at_.end()) {
    const std::uint64_t tip = chain().tip().header.index;
    return TxStatus::confirmed(it->second, tip - it->second + 1);
  }
  if (auto it = rejected_.find(tx_id); it != rejected_.end()) return TxStatus::rejected(it->second);
  return TxStatus::rejected("unknown");
}

void Ledger::faucet(const Address& to, std::uint64_t amount) { wallets_.credit(to, amount); }

nlohmann::json Ledger::snapshot() const {
  nlohmann::json j;
  j["tick"] = tick_;
  std::ostringstream rng;
  rng << lottery_;
  j["lottery"] = rng.str();
  j["next_seq"] = pool_.next_seq_;

  auto& wallets = j["wallets"] = nlohmann::json::object();
  for (const auto& [addr, bal] : wallets_.entries()) wallets[addr.hex()] = bal;

  auto& pending = j["pending"] = nlohmann::json::array();
  for (const auto& p : pool_.pending()) {
    pending.push_back({{"sender", p.tx.sender.hex()},
                       {"target", p.tx.target.hex()},
                       {"payload", p.tx.payload},
                       {"gas_fee", p.tx.gas_fee},
                       {"submit_seq", p.submit_seq}});
  }
  auto& rejected = j["rejected"] = nlohmann::json::object();
  for (const auto& [id, why] : rejected_) rejected[id.hex()] = why;
  return j;
}

Ledger Ledger::restore(LedgerConfig config, Chain chain, const nlohmann::json& snap) {
  Ledger ledger(config);
  if (!(chain.blocks.front() == ledger.chain().blocks.front())) {
    throw std::invalid_argument("chain genesis does not match configuration");
  }
  const auto verdict = check_chain(chain, config.chain);
  if (!verdict) {
    throw std::invalid_argument("chain invalid at block " + std::to_string(verdict.block_index) + ": " +
                                std::string(fault_name(verdict.fault)));
  }
  for (auto& node : ledger.nodes_) node.chain = chain;
  for (const auto& block : chain.blocks) ledger.index_block(block);

  ledger.tick_ = snap.at("tick").get<std::uint64_t>();
  std::istringstream rng(snap.at("lottery").get<std::string>());
  rng >> ledger.lottery_;
  for (const auto& [hex, bal] : snap.at("wallets").items()) {
    ledger.wallets_.credit(Address::from_hex(hex), bal.get<std::uint64_t>());
  }
  for (const auto& p : snap.at("pending")) {
    auto tx = Transaction::make(Address::from_hex(p.at("sender").get<std::string>()),
                                Address::from_hex(p.at("target").get<std::string>()),
                                p.at("payload").get<std::string>(), p.at("gas_fee").get<std::uint64_t>());
    ledger.pool_.restore(PendingTx{std::move(tx), p.at("submit_seq").get<std::uint64_t>()});
  }
  ledger.pool_.next_seq_ = std::max(ledger.pool_.next_seq_, snap.at("next_seq").get<std::uint64_t>());
  for (const auto& [hex, why] : snap.at("rejected").items()) {
    ledger.rejected_[Digest128::from_hex(hex)] = why.get<std::string>();
  }
  return ledger;
}

TxStatus confirmation_status(const Ledger& ledger, const Digest128& tx_id) { return ledger.status(tx_id); }

}  // namespace arec::ledger
