#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "arec/contract/registry.hpp"
#include "arec/ledger/ledger.hpp"
#include "arec/service/config.hpp"
#include "arec/service/model.hpp"

namespace arec::service {

/// Raised when a data directory cannot be loaded. Names the offending file.
class StartupError : public std::runtime_error {
 public:
  StartupError(std::filesystem::path file, const std::string& what)
      : std::runtime_error(file.string() + ": " + what), file_(std::move(file)) {}
  const std::filesystem::path& file() const { return file_; }

 private:
  std::filesystem::path file_;
};

/// Every user-facing operation of the service; the scenario runner maps one
/// verb onto each.
inline constexpr std::string_view kOperations[] = {
    "login",
    "logout",
    "deploy_contract",
    "admin_register_university",
    "admin_add_employer",
    "faucet",
    "read_outbox",
    "list_universities",
    "university_add_student",
    "authenticate_certificate",
    "revoke_certificate",
    "employer_verify",
    "get_achievement_record",
    "search_students",
    "request_reset",
    "apply_reset",
    "mine_round",
    "chain_status",
};

/// The off-chain tier. Owns an embedded ledger, accounts, achievement
/// records and the email outbox. All public methods are thread-safe; state
/// changes are serialized through one mutex.
///
/// With a data directory, service state is an append-only event log
/// (events.jsonl) and the ledger is persisted as chain.jsonl + ledger.json.
/// Sessions are not persisted.
class RegistryService {
 public:
  explicit RegistryService(ServiceConfig config);
  ~RegistryService();

  RegistryService(const RegistryService&) = delete;
  RegistryService& operator=(const RegistryService&) = delete;

  const ServiceConfig& config() const { return config_; }

  // Sessions.
  std::string login(const std::string& user_id, const std::string& secret);
  void logout(const std::string& token);
  Session session(const std::string& token) const;

  // Admin.
  SubmissionReceipt deploy_contract(const std::string& token);
  UniversityRegistration admin_register_university(const std::string& token, std::string id, const std::string& name,
                                                   const std::string& email, const std::string& secret);
  UserAccount admin_add_employer(const std::string& token, const std::string& id, const std::string& name,
                                 const std::string& email, const std::string& secret);
  /// `target` is a university id or a 40-hex address.
  std::uint64_t faucet(const std::string& token, const std::string& target, std::uint64_t amount);
  std::vector<EmailEvent> read_outbox(const std::string& token) const;

  // Public.
  std::vector<UniversityView> list_universities() const;

  // University.
  UserAccount university_add_student(const std::string& token, const std::string& university_id,
                                     const std::string& student_id, const std::string& name,
                                     const std::string& email, const std::string& secret);
  CertificateReceipt authenticate_certificate(const std::string& token, const std::string& university_id,
                                              const std::string& student_id, const std::string& title,
                                              Category category, std::span<const std::uint8_t> document,
                                              std::optional<std::uint64_t> gas_fee = std::nullopt);
  SubmissionReceipt revoke_certificate(const std::string& token, const std::string& university_id,
                                       const Digest128& cert_digest,
                                       std::optional<std::uint64_t> gas_fee = std::nullopt);

  // Verification needs no session; the token is accepted for symmetry.
  VerifyOutcome employer_verify_digest(std::string_view digest_hex) const;
  VerifyOutcome employer_verify_document(std::span<const std::uint8_t> document) const;

  AchievementRecord get_achievement_record(const std::string& token, const std::string& student_id) const;
  std::vector<SearchHit> search_students(const std::string& token, const SearchQuery& query) const;

  // Credential reset. Unknown ids succeed silently.
  void request_reset(const std::string& user_id);
  void apply_reset(const std::string& reset_token, const std::string& new_secret);

  // Ledger driving and inspection.
  ledger::RoundReport mine_round();
  /// Runs a round only if transactions are pending.
  std::optional<ledger::RoundReport> mine_if_pending();
  ChainSummary chain_summary() const;
  ledger::Chain chain() const;
  ledger::TxStatus tx_status(const Digest128& tx_id) const;
  std::optional<std::vector<std::uint8_t>> stored_document(const Digest128& digest) const;

  /// Operator access without a session (CLI and scenario tooling).
  void operator_faucet(const Address& to, std::uint64_t amount);
  std::vector<EmailEvent> operator_outbox() const;

  /// Write ledger files. Event log lines are flushed as they are written.
  void flush();

  /// Canonical dump of every persistent fact (tests compare these to detect
  /// state changes).
  nlohmann::json state_dump() const;
  std::uint64_t wallet_balance(const Address& a) const;

 private:
  struct PendingOp {
    enum class Kind { Deploy, RegisterUniversity, StoreCertificate, Revoke };
    Kind kind = Kind::Deploy;
    Digest128 tx_id;
    std::string university_id;
    std::string student_id;
    std::string title;
    Category category = Category::Academic;
    Digest128 cert_digest;
  };

  struct UniversityInfo {
    std::string id;
    bool confirmed = false;
    std::uint64_t registered_at = 0;
  };

  // Caller holds mu_ for all of these.
  const UserAccount& require_session(const std::string& token, std::initializer_list<Role> roles) const;
  const UserAccount* find_account(const std::string& token) const;
  const UserAccount& own_university(const std::string& token, const std::string& university_id) const;
  std::string random_hex(std::size_t bytes);
  Address fresh_address();
  UserAccount new_account(const std::string& id, Role role, const std::string& name, const std::string& email,
                          const std::string& secret);
  void ensure_free_id(const std::string& id) const;
  SubmissionReceipt submit_call(const Address& sender, const contract::ContractCall& call, std::uint64_t fee);
  ledger::RoundReport run_round_locked();
  void resolve_pending(const ledger::Block& block);
  VerifyOutcome verify_locked(const Digest128& d) const;
  const contract::ContractState& contract_state() const { return replay_.state; }
  bool secret_matches(const UserAccount& a, const std::string& secret) const;

  void record(nlohmann::json event);
  void apply(const nlohmann::json& event);
  void persist_ledger();
  void load();

  ServiceConfig config_;
  mutable std::mutex mu_;
  ledger::Ledger ledger_;
  contract::Replay replay_;
  std::map<Digest128, contract::ExecResult> receipts_;
  std::mt19937_64 rng_;
  std::uint64_t event_count_ = 0;

  std::map<std::string, UserAccount> accounts_;
  std::map<std::string, UniversityInfo> universities_;
  std::map<std::string, AchievementRecord> records_;
  std::vector<EmailEvent> outbox_;
  std::map<std::string, ResetToken> resets_;
  std::vector<PendingOp> pending_;
  std::map<Digest128, std::string> failed_;  // tx_id -> execution error
  mutable std::map<std::string, std::pair<std::string, std::uint64_t>> sessions_;  // token -> (user, last tick)

  std::map<Digest128, std::vector<std::uint8_t>> memory_documents_;  // used without a data dir

  std::filesystem::path dir_;
  std::ofstream event_log_;
};

}  // namespace arec::service
