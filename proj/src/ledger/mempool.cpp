#include "arec/ledger/mempool.hpp"

#include <algorithm>

namespace arec::ledger {

std::uint64_t WalletBook::balance(const Address& a) const {
  auto it = balances_.find(a);
  return it == balances_.end() ? 0 : it->second;
}

void WalletBook::credit(const Address& a, std::uint64_t amount) { balances_[a] += amount; }

bool WalletBook::debit(const Address& a, std::uint64_t amount) {
  auto it = balances_.find(a);
  if (it == balances_.end() || it->second < amount) return false;
  it->second -= amount;
  return true;
}

std::uint64_t WalletBook::total() const {
  std::uint64_t sum = 0;
  for (const auto& [_, v] : balances_) sum += v;
  return sum;
}

std::vector<PendingTx> Mempool::pending() const {
  std::vector<PendingTx> out;
  out.reserve(pending_.size());
  for (const auto& [_, p] : pending_) out.push_back(p);
  std::sort(out.begin(), out.end(), [](const PendingTx& a, const PendingTx& b) {
    if (a.tx.gas_fee != b.tx.gas_fee) return a.tx.gas_fee > b.tx.gas_fee;
    return a.submit_seq < b.submit_seq;
  });
  return out;
}

std::vector<Transaction> Mempool::select(std::size_t capacity) const {
  auto ordered = pending();
  if (ordered.size() > capacity) ordered.resize(capacity);
  std::vector<Transaction> out;
  out.reserve(ordered.size());
  for (auto& p : ordered) out.push_back(std::move(p.tx));
  return out;
}

std::uint64_t Mempool::remove(const std::vector<Transaction>& mined) {
  std::uint64_t released = 0;
  for (const auto& tx : mined) {
    auto it = pending_.find(tx.tx_id);
    if (it == pending_.end()) continue;
    released += it->second.tx.gas_fee;
    pending_.erase(it);
  }
  escrow_ -= released;
  return released;
}

void Mempool::restore(PendingTx ptx) {
  escrow_ += ptx.tx.gas_fee;
  next_seq_ = std::max(next_seq_, ptx.submit_seq + 1);
  seen_.insert(ptx.tx.tx_id);
  pending_.emplace(ptx.tx.tx_id, std::move(ptx));
}

TxStatus submit_transaction(Mempool& pool, WalletBook& wallets, const Transaction& tx) {
  if (tx.gas_fee < 1) return TxStatus::rejected("fee must be positive");
  if (tx.compute_id() != tx.tx_id) return TxStatus::rejected("tx_id mismatch");
  if (pool.seen(tx.tx_id)) return TxStatus::rejected("duplicate");
  if (!wallets.debit(tx.sender, tx.gas_fee)) return TxStatus::rejected("insufficient balance");

  pool.escrow_ += tx.gas_fee;
  pool.seen_.insert(tx.tx_id);
  pool.pending_.emplace(tx.tx_id, PendingTx{tx, pool.next_seq_++});
  return TxStatus::pending();
}

}  // namespace arec::ledger
