#include "arec/service/model.hpp"

#include <algorithm>
#include <cctype>

namespace arec::service {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view role_name(Role r) {
  switch (r) {
    case Role::Admin: return "admin";
    case Role::University: return "university";
    case Role::Student: return "student";
    case Role::Employer: return "employer";
  }
  return "student";
}

Role parse_role(std::string_view text) {
  for (Role r : {Role::Admin, Role::University, Role::Student, Role::Employer}) {
    if (role_name(r) == text) return r;
  }
  throw ServiceError(ErrorCode::InvalidInput, "unknown role '" + std::string(text) + "'");
}

std::string_view category_name(Category c) {
  switch (c) {
    case Category::Academic: return "academic";
    case Category::ExtraCurricular: return "extra_curricular";
    case Category::Employability: return "employability";
    case Category::Voluntary: return "voluntary";
    case Category::Prize: return "prize";
  }
  return "academic";
}

Category parse_category(std::string_view text) {
  const auto want = lower(text);
  for (Category c : {Category::Academic, Category::ExtraCurricular, Category::Employability, Category::Voluntary,
                     Category::Prize}) {
    if (category_name(c) == want) return c;
  }
  if (want == "extracurricular" || want == "extra-curricular") return Category::ExtraCurricular;
  throw ServiceError(ErrorCode::InvalidInput, "unknown category '" + std::string(text) + "'");
}

std::string_view error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::Unauthenticated: return "unauthenticated";
    case ErrorCode::Forbidden: return "forbidden";
    case ErrorCode::InvalidCredentials: return "invalid_credentials";
    case ErrorCode::InvalidToken: return "invalid_token";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::Conflict: return "conflict";
    case ErrorCode::DuplicateDigest: return "duplicate_digest";
    case ErrorCode::WalletUnderfunded: return "wallet_underfunded";
    case ErrorCode::NotDeployed: return "not_deployed";
    case ErrorCode::InvalidInput: return "invalid_input";
    case ErrorCode::LedgerRejected: return "ledger_rejected";
  }
  return "invalid_input";
}

int http_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::Unauthenticated:
    case ErrorCode::InvalidCredentials:
      return 401;
    case ErrorCode::Forbidden:
      return 403;
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::Conflict:
    case ErrorCode::DuplicateDigest:
    case ErrorCode::NotDeployed:
      return 409;
    case ErrorCode::WalletUnderfunded:
      return 402;
    case ErrorCode::InvalidToken:
    case ErrorCode::InvalidInput:
      return 400;
    case ErrorCode::LedgerRejected:
      return 422;
  }
  return 400;
}

std::vector<std::string> hex_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isxdigit(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && std::isxdigit(static_cast<unsigned char>(text[j]))) ++j;
    if (j - i == 32) out.emplace_back(text.substr(i, 32));
    i = j;
  }
  return out;
}

nlohmann::json to_json(const UserAccount& a) {
  nlohmann::json j{{"user_id", a.user_id},
                   {"role", role_name(a.role)},
                   {"display_name", a.display_name},
                   {"email", a.email}};
  if (a.linked_address) j["linked_address"] = a.linked_address->hex();
  if (a.university_id) j["university_id"] = *a.university_id;
  return j;
}

nlohmann::json to_json(const AchievementEntry& e) {
  return {{"cert_digest", e.cert_digest.hex()},
          {"title", e.title},
          {"category", category_name(e.category)},
          {"issuer_university", e.issuer_university},
          {"issuer_id", e.issuer_id},
          {"tx_id", e.tx_id.hex()},
          {"confirmed_block", e.confirmed_block},
          {"revoked", e.revoked}};
}

nlohmann::json to_json(const AchievementRecord& r) {
  auto entries = nlohmann::json::array();
  for (const auto& e : r.entries) entries.push_back(to_json(e));
  return {{"student_id", r.student_id}, {"entries", entries}};
}

nlohmann::json to_json(const EmailEvent& e) {
  return {{"event_id", e.event_id},
          {"kind", e.kind == EmailKind::Certificate ? "certificate" : "reset"},
          {"to", e.to},
          {"subject", e.subject},
          {"body", e.body},
          {"created_at", e.created_at},
          {"delivered", e.delivered}};
}

nlohmann::json to_json(const UniversityView& u) {
  return {{"id", u.id},
          {"name", u.name},
          {"address", u.address.hex()},
          {"confirmed", u.confirmed},
          {"registered_at", u.registered_at},
          {"balance", u.balance}};
}

nlohmann::json to_json(const ledger::TxStatus& s) {
  nlohmann::json j{{"status", s.label()}};
  if (s.is_confirmed()) {
    j["block_index"] = s.block_index;
    j["depth"] = s.depth;
  }
  if (s.is_rejected()) j["reason"] = s.reason;
  return j;
}

nlohmann::json to_json(const CertificateReceipt& r) {
  return {{"cert_digest", r.cert_digest.hex()}, {"tx_id", r.tx_id.hex()}, {"status", to_json(r.status)}};
}

nlohmann::json to_json(const SubmissionReceipt& r) {
  return {{"tx_id", r.tx_id.hex()}, {"status", to_json(r.status)}};
}

nlohmann::json to_json(const VerifyOutcome& v) {
  nlohmann::json j{{"valid", v.valid}, {"revoked", v.revoked}, {"checked_digest", v.checked_digest.hex()}};
  j["issuer_name"] = v.issuer_name ? nlohmann::json(*v.issuer_name) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const SearchHit& h) {
  auto entries = nlohmann::json::array();
  for (const auto& e : h.entries) entries.push_back(to_json(e));
  return {{"student_id", h.student_id}, {"display_name", h.display_name}, {"entries", entries}};
}

nlohmann::json to_json(const ChainSummary& c) {
  nlohmann::json j{{"length", c.length},
                   {"tip_hash", c.tip_hash.hex()},
                   {"pending", c.pending},
                   {"tick", c.tick},
                   {"deployed", c.deployed}};
  if (c.contract_address) j["contract_address"] = c.contract_address->hex();
  return j;
}

}  // namespace arec::service
