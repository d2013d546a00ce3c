#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "arec/ledger/types.hpp"

namespace arec::contract {

using crypto::Digest128;
using ledger::Address;

inline constexpr std::string_view kCodeVersion = "achievement-registry/1";

struct Deploy {
  friend bool operator==(const Deploy&, const Deploy&) = default;
};

struct RegisterUniversity {
  std::string name;
  Address university;
  friend bool operator==(const RegisterUniversity&, const RegisterUniversity&) = default;
};

// Only the digest ever reaches the chain; there is no field for document bytes.
struct StoreCertificate {
  Digest128 cert_digest;
  std::string student_ref;
  friend bool operator==(const StoreCertificate&, const StoreCertificate&) = default;
};

struct RevokeCertificate {
  Digest128 cert_digest;
  friend bool operator==(const RevokeCertificate&, const RevokeCertificate&) = default;
};

using ContractCall = std::variant<Deploy, RegisterUniversity, StoreCertificate, RevokeCertificate>;

/// Sorted keys, no whitespace, e.g.
/// {"cert_digest":"…","kind":"store_certificate","student_ref":"S1"}
std::string to_canonical_json(const ContractCall& call);

/// Throws std::invalid_argument on unknown kinds, missing fields or
/// non-canonical input.
ContractCall parse_call(std::string_view json);

std::string_view call_kind(const ContractCall& call);

/// 20 octets: md5(deployer || "deploy"), then the first four octets of
/// md5 of that digest.
Address derive_contract_address(const Address& deployer);

struct UniversityEntry {
  std::string name;
  std::uint64_t registered_at = 0;
  friend bool operator==(const UniversityEntry&, const UniversityEntry&) = default;
};

struct CertificateEntry {
  Digest128 cert_digest;
  Address issuer;
  std::string student_ref;
  std::uint64_t stored_at = 0;
  bool revoked = false;
  std::optional<std::uint64_t> revoked_at;
  friend bool operator==(const CertificateEntry&, const CertificateEntry&) = default;
};

struct ContractState {
  bool deployed = false;
  Address contract_address;
  Address admin;
  std::string code_version;
  std::map<Address, UniversityEntry> universities;
  std::map<Digest128, CertificateEntry> certificates;

  friend bool operator==(const ContractState&, const ContractState&) = default;
};

struct ExecResult {
  bool ok = true;
  std::string error;

  static ExecResult success() { return {}; }
  static ExecResult failure(std::string why) { return {false, std::move(why)}; }
  friend bool operator==(const ExecResult&, const ExecResult&) = default;
};

/// Applies one call. On failure the state is untouched.
ExecResult apply_call(ContractState& state, const Address& sender, const Address& target,
                      const ContractCall& call, std::uint64_t block_index);

/// Decodes the payload first; an undecodable payload fails like any other call.
ExecResult execute(ContractState& state, const ledger::Transaction& tx, std::uint64_t block_index);

struct Receipt {
  Digest128 tx_id;
  std::uint64_t block_index = 0;
  std::size_t position = 0;
  ExecResult result;

  friend bool operator==(const Receipt&, const Receipt&) = default;
};

struct Replay {
  ContractState state;
  std::vector<Receipt> receipts;  // chain order
};

/// Folds every transaction in (block, position) order. Precondition: the
/// chain validates.
Replay replay(const ledger::Chain& chain);
ContractState replay_state(const ledger::Chain& chain);

struct Verification {
  bool valid = false;
  std::optional<std::string> issuer_name;
  bool revoked = false;
};

Verification verify_certificate(const ContractState& state, const Digest128& cert_digest);

/// Build a fee-bearing transaction for `call` from `sender`. Deploy calls are
/// addressed to the address they will create.
ledger::Transaction make_call(const Address& sender, const Address& contract_address, const ContractCall& call,
                              std::uint64_t gas_fee);

}  // namespace arec::contract
