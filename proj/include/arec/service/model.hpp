#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "arec/crypto/digest.hpp"
#include "arec/ledger/types.hpp"

namespace arec::service {

using crypto::Digest128;
using ledger::Address;

enum class Role { Admin, University, Student, Employer };

std::string_view role_name(Role r);
Role parse_role(std::string_view text);

enum class Category { Academic, ExtraCurricular, Employability, Voluntary, Prize };

std::string_view category_name(Category c);
/// Accepts the names above, case-insensitively. Throws ServiceError.
Category parse_category(std::string_view text);

/// Stable error codes; the HTTP layer maps each to a status.
enum class ErrorCode {
  Unauthenticated,     // no or expired session
  Forbidden,           // wrong role or not the owning party
  InvalidCredentials,
  InvalidToken,
  NotFound,
  Conflict,
  DuplicateDigest,
  WalletUnderfunded,
  NotDeployed,
  InvalidInput,
  LedgerRejected,
};

std::string_view error_code_name(ErrorCode c);
int http_status(ErrorCode c);

class ServiceError : public std::runtime_error {
 public:
  ServiceError(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

  bool is_authorization() const { return code_ == ErrorCode::Unauthenticated || code_ == ErrorCode::Forbidden; }

 private:
  ErrorCode code_;
};

struct UserAccount {
  std::string user_id;
  Role role = Role::Student;
  std::string display_name;
  std::string email;
  Digest128 secret_digest;            // md5(salt || secret)
  std::array<std::uint8_t, 16> salt{};
  std::optional<Address> linked_address;   // Admin and University
  std::optional<std::string> university_id;  // Student
};

struct AchievementEntry {
  Digest128 cert_digest;
  std::string title;
  Category category = Category::Academic;
  std::string issuer_university;  // display name
  std::string issuer_id;
  Digest128 tx_id;
  std::uint64_t confirmed_block = 0;
  bool revoked = false;
};

struct AchievementRecord {
  std::string student_id;
  std::vector<AchievementEntry> entries;
};

enum class EmailKind { Certificate, Reset };

struct EmailEvent {
  std::uint64_t event_id = 0;
  EmailKind kind = EmailKind::Certificate;
  std::string to;
  std::string subject;
  std::string body;
  std::uint64_t created_at = 0;
  bool delivered = false;
};

struct ResetToken {
  std::string token;
  std::string user_id;
  std::uint64_t expires_at = 0;
  bool used = false;
};

struct UniversityView {
  std::string id;
  std::string name;
  Address address;
  bool confirmed = false;
  std::uint64_t registered_at = 0;
  std::uint64_t balance = 0;
};

struct SubmissionReceipt {
  Digest128 tx_id;
  ledger::TxStatus status;
};

struct UniversityRegistration {
  UniversityView university;
  SubmissionReceipt receipt;
};

struct CertificateReceipt {
  Digest128 cert_digest;
  Digest128 tx_id;
  ledger::TxStatus status;
};

struct VerifyOutcome {
  bool valid = false;
  std::optional<std::string> issuer_name;
  bool revoked = false;
  Digest128 checked_digest;
};

struct SearchQuery {
  std::optional<Category> category;
  std::optional<std::string> university;
  std::optional<std::string> keyword;
};

struct SearchHit {
  std::string student_id;
  std::string display_name;
  std::vector<AchievementEntry> entries;
};

struct ChainSummary {
  std::uint64_t length = 0;
  Digest128 tip_hash;
  std::size_t pending = 0;
  std::uint64_t tick = 0;
  bool deployed = false;
  std::optional<Address> contract_address;
};

struct Session {
  std::string token;
  std::string user_id;
  Role role = Role::Student;
};

/// Maximal runs of exactly 32 hex characters in `text` (digests, tokens).
std::vector<std::string> hex_tokens(std::string_view text);

// JSON views used by the HTTP API and scenario output. Secrets and salts are
// never part of these.
nlohmann::json to_json(const UserAccount& a);
nlohmann::json to_json(const AchievementEntry& e);
nlohmann::json to_json(const AchievementRecord& r);
nlohmann::json to_json(const EmailEvent& e);
nlohmann::json to_json(const UniversityView& u);
nlohmann::json to_json(const ledger::TxStatus& s);
nlohmann::json to_json(const CertificateReceipt& r);
nlohmann::json to_json(const SubmissionReceipt& r);
nlohmann::json to_json(const VerifyOutcome& v);
nlohmann::json to_json(const SearchHit& h);
nlohmann::json to_json(const ChainSummary& c);

}  // namespace arec::service
