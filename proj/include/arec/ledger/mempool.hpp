#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "arec/ledger/types.hpp"

namespace arec::ledger {

/// Fee balances per address. Balances never go negative.
class WalletBook {
 public:
  std::uint64_t balance(const Address& a) const;
  void credit(const Address& a, std::uint64_t amount);
  /// Returns false (and changes nothing) when the balance is short.
  bool debit(const Address& a, std::uint64_t amount);
  std::uint64_t total() const;

  const std::map<Address, std::uint64_t>& entries() const { return balances_; }

 private:
  std::map<Address, std::uint64_t> balances_;
};

struct PendingTx {
  Transaction tx;
  std::uint64_t submit_seq = 0;
};

class Mempool {
 public:
  bool contains(const Digest128& id) const { return pending_.count(id) != 0; }
  bool seen(const Digest128& id) const { return seen_.count(id) != 0; }
  std::size_t size() const { return pending_.size(); }
  bool empty() const { return pending_.empty(); }

  /// Sum of fees held for pending transactions.
  std::uint64_t escrowed() const { return escrow_; }

  /// Highest fee first, ties by submit_seq. Read-only.
  std::vector<Transaction> select(std::size_t capacity) const;

  std::vector<PendingTx> pending() const;

  /// Remove mined transactions; returns the escrow released.
  std::uint64_t remove(const std::vector<Transaction>& mined);

  /// Marks ids as already known (used when restoring from a chain).
  void mark_seen(const Digest128& id) { seen_.insert(id); }

 private:
  friend TxStatus submit_transaction(Mempool&, WalletBook&, const Transaction&);
  void restore(PendingTx ptx);
  friend class Ledger;

  std::unordered_map<Digest128, PendingTx> pending_;
  std::unordered_set<Digest128> seen_;
  std::uint64_t next_seq_ = 1;
  std::uint64_t escrow_ = 0;
};

/// Accept `tx` into the pool, escrowing its fee from the sender's wallet.
TxStatus submit_transaction(Mempool& pool, WalletBook& wallets, const Transaction& tx);

inline std::vector<Transaction> select_transactions(const Mempool& pool, std::size_t capacity) {
  return pool.select(capacity);
}

}  // namespace arec::ledger
