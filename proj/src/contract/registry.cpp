#include "arec/contract/registry.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

#include "arec/crypto/md5.hpp"

namespace arec::contract {
namespace {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

json call_to_json(const ContractCall& call) {
  return std::visit(
      overloaded{
          [](const Deploy&) { return json{{"kind", "deploy"}}; },
          [](const RegisterUniversity& c) {
            return json{{"kind", "register_university"},
                        {"name", c.name},
                        {"university_address", c.university.hex()}};
          },
          [](const StoreCertificate& c) {
            return json{{"kind", "store_certificate"},
                        {"cert_digest", c.cert_digest.hex()},
                        {"student_ref", c.student_ref}};
          },
          [](const RevokeCertificate& c) {
            return json{{"kind", "revoke_certificate"}, {"cert_digest", c.cert_digest.hex()}};
          },
      },
      call);
}

void expect_keys(const json& j, std::size_t n) {
  if (j.size() != n) throw std::invalid_argument("unexpected fields in call");
}

ExecResult apply(ContractState& s, const Address& sender, const Deploy&, std::uint64_t) {
  if (s.deployed) return ExecResult::failure("already deployed");
  s.deployed = true;
  s.admin = sender;
  s.contract_address = derive_contract_address(sender);
  s.code_version = std::string(kCodeVersion);
  return ExecResult::success();
}

ExecResult apply(ContractState& s, const Address& sender, const RegisterUniversity& c, std::uint64_t block) {
  if (sender != s.admin) return ExecResult::failure("unauthorized");
  if (c.name.empty()) return ExecResult::failure("empty name");
  if (s.universities.count(c.university) != 0) return ExecResult::failure("duplicate");
  s.universities.emplace(c.university, UniversityEntry{c.name, block});
  return ExecResult::success();
}

ExecResult apply(ContractState& s, const Address& sender, const StoreCertificate& c, std::uint64_t block) {
  if (s.universities.count(sender) == 0) return ExecResult::failure("unauthorized");
  if (s.certificates.count(c.cert_digest) != 0) return ExecResult::failure("duplicate digest");
  s.certificates.emplace(c.cert_digest, CertificateEntry{c.cert_digest, sender, c.student_ref, block, false, {}});
  return ExecResult::success();
}

ExecResult apply(ContractState& s, const Address& sender, const RevokeCertificate& c, std::uint64_t block) {
  auto it = s.certificates.find(c.cert_digest);
  if (it == s.certificates.end()) return ExecResult::failure("unknown digest");
  if (it->second.issuer != sender) return ExecResult::failure("unauthorized");
  if (it->second.revoked) return ExecResult::failure("already revoked");
  it->second.revoked = true;
  it->second.revoked_at = block;
  return ExecResult::success();
}

}  // namespace

std::string to_canonical_json(const ContractCall& call) { return call_to_json(call).dump(); }

ContractCall parse_call(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("call is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw std::invalid_argument("call has no kind");
  }
  const auto kind = j["kind"].get<std::string>();
  ContractCall call;
  try {
    if (kind == "deploy") {
      expect_keys(j, 1);
      call = Deploy{};
    } else if (kind == "register_university") {
      expect_keys(j, 3);
      call = RegisterUniversity{j.at("name").get<std::string>(),
                                Address::from_hex(j.at("university_address").get<std::string>())};
    } else if (kind == "store_certificate") {
      expect_keys(j, 3);
      call = StoreCertificate{Digest128::from_hex(j.at("cert_digest").get<std::string>()),
                              j.at("student_ref").get<std::string>()};
    } else if (kind == "revoke_certificate") {
      expect_keys(j, 2);
      call = RevokeCertificate{Digest128::from_hex(j.at("cert_digest").get<std::string>())};
    } else {
      throw std::invalid_argument("unknown call kind '" + kind + "'");
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed call: ") + e.what());
  }
  if (to_canonical_json(call) != text) throw std::invalid_argument("call is not in canonical form");
  return call;
}

std::string_view call_kind(const ContractCall& call) {
  static constexpr std::string_view kNames[] = {"deploy", "register_university", "store_certificate",
                                                "revoke_certificate"};
  return kNames[call.index()];
}

Address derive_contract_address(const Address& deployer) {
  crypto::Md5 h;
  h.update(deployer.bytes);
  h.update("deploy");
  const auto head = h.finish();
  const auto tail = crypto::md5_digest(head.bytes);
  Address a;
  std::copy(head.bytes.begin(), head.bytes.end(), a.bytes.begin());
  std::copy(tail.bytes.begin(), tail.bytes.begin() + 4, a.bytes.begin() + 16);
  return a;
}

ExecResult apply_call(ContractState& state, const Address& sender, const Address& target,
                      const ContractCall& call, std::uint64_t block_index) {
  if (std::holds_alternative<Deploy>(call)) {
    if (state.deployed) return ExecResult::failure("already deployed");
    if (target != derive_contract_address(sender)) return ExecResult::failure("wrong target");
  } else {
    if (!state.deployed) return ExecResult::failure("not deployed");
    if (target != state.contract_address) return ExecResult::failure("wrong target");
  }
  return std::visit([&](const auto& c) { return apply(state, sender, c, block_index); }, call);
}

ExecResult execute(ContractState& state, const ledger::Transaction& tx, std::uint64_t block_index) {
  ContractCall call;
  try {
    call = parse_call(tx.payload);
  } catch (const std::invalid_argument& e) {
    return ExecResult::failure("malformed call");
  }
  return apply_call(state, tx.sender, tx.target, call, block_index);
}

Replay replay(const ledger::Chain& chain) {
  Replay out;
  for (const auto& block : chain.blocks) {
    for (std::size_t i = 0; i < block.transactions.size(); ++i) {
      const auto& tx = block.transactions[i];
      out.receipts.push_back(Receipt{tx.tx_id, block.header.index, i, execute(out.state, tx, block.header.index)});
    }
  }
  return out;
}

ContractState replay_state(const ledger::Chain& chain) { return replay(chain).state; }

Verification verify_certificate(const ContractState& state, const Digest128& cert_digest) {
  Verification v;
  auto it = state.certificates.find(cert_digest);
  if (it == state.certificates.end()) return v;
  v.revoked = it->second.revoked;
  v.valid = !it->second.revoked;
  if (auto uni = state.universities.find(it->second.issuer); uni != state.universities.end()) {
    v.issuer_name = uni->second.name;
  }
  return v;
}

ledger::Transaction make_call(const Address& sender, const Address& contract_address, const ContractCall& call,
                              std::uint64_t gas_fee) {
  const Address target =
      std::holds_alternative<Deploy>(call) ? derive_contract_address(sender) : contract_address;
  return ledger::Transaction::make(sender, target, to_canonical_json(call), gas_fee);
}

}  // namespace arec::contract
