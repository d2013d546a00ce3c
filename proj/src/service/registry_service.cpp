#include "arec/service/registry_service.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "arec/crypto/hex.hpp"
#include "arec/crypto/md5.hpp"
#include "arec/ledger/serialize.hpp"

namespace arec::service {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kEventsFile = "events.jsonl";
constexpr const char* kChainFile = "chain.jsonl";
constexpr const char* kLedgerFile = "ledger.json";

ledger::LedgerConfig ledger_config(const ServiceConfig& c) {
  ledger::LedgerConfig lc;
  lc.chain.difficulty = c.difficulty;
  lc.chain.capacity = c.block_capacity;
  lc.node_count = c.node_count;
  lc.seed = c.seed;
  return lc;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string slug(std::string_view name) {
  std::string out;
  for (unsigned char c : name) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (!out.empty() && out.back() != '-') {
      out.push_back('-');
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out;
}

Digest128 salted_digest(const std::array<std::uint8_t, 16>& salt, const std::string& secret) {
  crypto::Md5 h;
  h.update(salt);
  h.update(secret);
  return h.finish();
}

bool constant_time_equal(const Digest128& a, const Digest128& b) {
  std::uint8_t diff = 0;
  for (std::size_t i = 0; i < a.bytes.size(); ++i) diff |= static_cast<std::uint8_t>(a.bytes[i] ^ b.bytes[i]);
  return diff == 0;
}

void require_text(const std::string& value, const char* what) {
  if (value.empty()) throw ServiceError(ErrorCode::InvalidInput, std::string(what) + " must not be empty");
}

json account_to_event_json(const UserAccount& a) {
  json j = to_json(a);
  j["salt"] = crypto::hex_encode(a.salt);
  j["secret_digest"] = a.secret_digest.hex();
  return j;
}

UserAccount account_from_event_json(const json& j) {
  UserAccount a;
  a.user_id = j.at("user_id").get<std::string>();
  a.role = parse_role(j.at("role").get<std::string>());
  a.display_name = j.at("display_name").get<std::string>();
  a.email = j.at("email").get<std::string>();
  const auto salt = crypto::hex_decode(j.at("salt").get<std::string>());
  if (salt.size() != a.salt.size()) throw std::invalid_argument("bad salt length");
  std::copy(salt.begin(), salt.end(), a.salt.begin());
  a.secret_digest = Digest128::from_hex(j.at("secret_digest").get<std::string>());
  if (j.contains("linked_address")) a.linked_address = Address::from_hex(j.at("linked_address").get<std::string>());
  if (j.contains("university_id")) a.university_id = j.at("university_id").get<std::string>();
  return a;
}

AchievementEntry entry_from_json(const json& j) {
  AchievementEntry e;
  e.cert_digest = Digest128::from_hex(j.at("cert_digest").get<std::string>());
  e.title = j.at("title").get<std::string>();
  e.category = parse_category(j.at("category").get<std::string>());
  e.issuer_university = j.at("issuer_university").get<std::string>();
  e.issuer_id = j.at("issuer_id").get<std::string>();
  e.tx_id = Digest128::from_hex(j.at("tx_id").get<std::string>());
  e.confirmed_block = j.at("confirmed_block").get<std::uint64_t>();
  return e;
}

EmailEvent email_from_json(const json& j) {
  EmailEvent e;
  e.event_id = j.at("event_id").get<std::uint64_t>();
  e.kind = j.at("kind").get<std::string>() == "reset" ? EmailKind::Reset : EmailKind::Certificate;
  e.to = j.at("to").get<std::string>();
  e.subject = j.at("subject").get<std::string>();
  e.body = j.at("body").get<std::string>();
  e.created_at = j.at("created_at").get<std::uint64_t>();
  e.delivered = j.at("delivered").get<bool>();
  return e;
}

const char* kind_name(int kind) {
  static const char* names[] = {"deploy", "register_university", "store_certificate", "revoke"};
  return names[kind];
}

}  // namespace

RegistryService::RegistryService(ServiceConfig config)
    : config_(std::move(config)), ledger_((config_.validate(), ledger_config(config_))), rng_(config_.seed) {
  if (!config_.data_dir.empty()) {
    dir_ = config_.data_dir;
    fs::create_directories(dir_ / "documents");
    load();
    event_log_.open(dir_ / kEventsFile, std::ios::app | std::ios::binary);
    if (!event_log_) throw StartupError(dir_ / kEventsFile, "cannot open for append");
  }
  if (!accounts_.count(config_.admin_id)) {
    std::lock_guard lock(mu_);
    auto admin = new_account(config_.admin_id, Role::Admin, "System administrator", "", config_.admin_secret);
    admin.linked_address = fresh_address();
    record({{"type", "account"}, {"account", account_to_event_json(admin)}});
    ledger_.faucet(*admin.linked_address, config_.admin_funding);
    persist_ledger();
  }
}

RegistryService::~RegistryService() {
  try {
    flush();
  } catch (...) {
  }
}

// ---------------------------------------------------------------- persistence

void RegistryService::record(json event) {
  apply(event);
  ++event_count_;
  if (event_log_.is_open()) {
    event_log_ << event.dump() << '\n';
    event_log_.flush();
  }
}

void RegistryService::apply(const json& ev) {
  const auto type = ev.at("type").get<std::string>();
  if (type == "account") {
    auto a = account_from_event_json(ev.at("account"));
    if (a.role == Role::Student) records_[a.user_id] = AchievementRecord{a.user_id, {}};
    if (a.role == Role::University) universities_[a.user_id] = UniversityInfo{a.user_id, false, 0};
    accounts_[a.user_id] = std::move(a);
  } else if (type == "university_confirmed") {
    auto& u = universities_.at(ev.at("id").get<std::string>());
    u.confirmed = true;
    u.registered_at = ev.at("block").get<std::uint64_t>();
  } else if (type == "pending") {
    PendingOp op;
    op.kind = static_cast<PendingOp::Kind>(ev.at("kind").get<int>());
    op.tx_id = Digest128::from_hex(ev.at("tx_id").get<std::string>());
    op.university_id = ev.value("university_id", "");
    op.student_id = ev.value("student_id", "");
    op.title = ev.value("title", "");
    if (ev.contains("category")) op.category = parse_category(ev.at("category").get<std::string>());
    if (ev.contains("cert_digest")) op.cert_digest = Digest128::from_hex(ev.at("cert_digest").get<std::string>());
    pending_.push_back(std::move(op));
  } else if (type == "resolved") {
    const auto id = Digest128::from_hex(ev.at("tx_id").get<std::string>());
    std::erase_if(pending_, [&](const PendingOp& op) { return op.tx_id == id; });
    if (!ev.at("ok").get<bool>()) failed_[id] = ev.at("error").get<std::string>();
  } else if (type == "entry") {
    records_.at(ev.at("student_id").get<std::string>()).entries.push_back(entry_from_json(ev.at("entry")));
  } else if (type == "email") {
    outbox_.push_back(email_from_json(ev.at("email")));
  } else if (type == "secret") {
    auto& a = accounts_.at(ev.at("user_id").get<std::string>());
    const auto salt = crypto::hex_decode(ev.at("salt").get<std::string>());
    std::copy(salt.begin(), salt.end(), a.salt.begin());
    a.secret_digest = Digest128::from_hex(ev.at("secret_digest").get<std::string>());
  } else if (type == "reset_issued") {
    ResetToken t{ev.at("token").get<std::string>(), ev.at("user_id").get<std::string>(),
                 ev.at("expires_at").get<std::uint64_t>(), false};
    resets_[t.token] = t;
  } else if (type == "reset_used") {
    resets_.at(ev.at("token").get<std::string>()).used = true;
  } else {
    throw std::invalid_argument("unknown event type '" + type + "'");
  }
}

void RegistryService::persist_ledger() {
  if (dir_.empty()) return;
  ledger::write_chain_file(dir_ / kChainFile, ledger_.chain());
  json snap = ledger_.snapshot();
  snap["params"] = {{"difficulty", config_.difficulty},
                    {"block_capacity", config_.block_capacity},
                    {"node_count", config_.node_count},
                    {"seed", config_.seed}};
  const auto tmp = dir_ / (std::string(kLedgerFile) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << snap.dump() << '\n';
  }
  fs::rename(tmp, dir_ / kLedgerFile);
}

void RegistryService::flush() {
  std::lock_guard lock(mu_);
  persist_ledger();
  if (event_log_.is_open()) event_log_.flush();
}

void RegistryService::load() {
  const auto chain_path = dir_ / kChainFile;
  const auto ledger_path = dir_ / kLedgerFile;
  const auto events_path = dir_ / kEventsFile;

  if (fs::exists(chain_path) || fs::exists(ledger_path)) {
    if (!fs::exists(ledger_path)) throw StartupError(ledger_path, "missing (chain file present)");
    if (!fs::exists(chain_path)) throw StartupError(chain_path, "missing (ledger snapshot present)");
    json snap;
    try {
      std::ifstream in(ledger_path);
      snap = json::parse(in);
      const auto& p = snap.at("params");
      config_.difficulty = p.at("difficulty").get<unsigned>();
      config_.block_capacity = p.at("block_capacity").get<std::size_t>();
      config_.node_count = p.at("node_count").get<std::size_t>();
      config_.seed = p.at("seed").get<std::uint64_t>();
      config_.validate();
    } catch (const std::exception& e) {
      throw StartupError(ledger_path, e.what());
    }
    ledger::Chain chain;
    try {
      chain = ledger::read_chain_file(chain_path);
    } catch (const std::exception& e) {
      throw StartupError(chain_path, e.what());
    }
    try {
      ledger_ = ledger::Ledger::restore(ledger_config(config_), std::move(chain), snap);
    } catch (const std::invalid_argument& e) {
      throw StartupError(chain_path, e.what());
    } catch (const std::exception& e) {
      throw StartupError(ledger_path, e.what());
    }
    replay_ = contract::replay(ledger_.chain());
    for (const auto& r : replay_.receipts) receipts_[r.tx_id] = r.result;
  }

  if (fs::exists(events_path)) {
    std::ifstream in(events_path, std::ios::binary);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        apply(json::parse(line));
      } catch (const std::exception& e) {
        throw StartupError(events_path, "line " + std::to_string(lineno) + ": " + e.what());
      }
      ++event_count_;
    }
  }
  rng_.seed(config_.seed ^ (0x9e3779b97f4a7c15ULL * (event_count_ + 1)));
}

// ------------------------------------------------------------------- helpers

std::string RegistryService::random_hex(std::size_t bytes) {
  std::vector<std::uint8_t> raw(bytes);
  for (auto& b : raw) b = static_cast<std::uint8_t>(rng_());
  return crypto::hex_encode(raw);
}

Address RegistryService::fresh_address() {
  Address a;
  for (auto& b : a.bytes) b = static_cast<std::uint8_t>(rng_());
  return a;
}

UserAccount RegistryService::new_account(const std::string& id, Role role, const std::string& name,
                                         const std::string& email, const std::string& secret) {
  require_text(id, "id");
  require_text(secret, "secret");
  UserAccount a;
  a.user_id = id;
  a.role = role;
  a.display_name = name;
  a.email = email;
  for (auto& b : a.salt) b = static_cast<std::uint8_t>(rng_());
  a.secret_digest = salted_digest(a.salt, secret);
  return a;
}

void RegistryService::ensure_free_id(const std::string& id) const {
  if (accounts_.count(id)) throw ServiceError(ErrorCode::Conflict, "id '" + id + "' is already taken");
}

bool RegistryService::secret_matches(const UserAccount& a, const std::string& secret) const {
  return constant_time_equal(salted_digest(a.salt, secret), a.secret_digest);
}

const UserAccount* RegistryService::find_account(const std::string& token) const {
  auto it = sessions_.find(token);
  if (it == sessions_.end()) return nullptr;
  if (ledger_.tick() - it->second.second > config_.session_ttl_ticks) {
    sessions_.erase(it);
    return nullptr;
  }
  it->second.second = ledger_.tick();
  auto acc = accounts_.find(it->second.first);
  return acc == accounts_.end() ? nullptr : &acc->second;
}

const UserAccount& RegistryService::require_session(const std::string& token,
                                                    std::initializer_list<Role> roles) const {
  const UserAccount* a = find_account(token);
  if (!a) throw ServiceError(ErrorCode::Unauthenticated, "a valid session is required");
  if (std::find(roles.begin(), roles.end(), a->role) == roles.end()) {
    throw ServiceError(ErrorCode::Forbidden, "role '" + std::string(role_name(a->role)) + "' may not do this");
  }
  return *a;
}

const UserAccount& RegistryService::own_university(const std::string& token, const std::string& university_id) const {
  const auto& uni = require_session(token, {Role::University});
  if (uni.user_id != university_id) throw ServiceError(ErrorCode::Forbidden, "sessions act only for their own university");
  const auto& info = universities_.at(uni.user_id);
  if (!info.confirmed) throw ServiceError(ErrorCode::Forbidden, "university is not yet registered on chain");
  return uni;
}

SubmissionReceipt RegistryService::submit_call(const Address& sender, const contract::ContractCall& call,
                                               std::uint64_t fee) {
  if (fee < 1) throw ServiceError(ErrorCode::InvalidInput, "gas fee must be at least 1");
  const auto tx = contract::make_call(sender, contract_state().contract_address, call, fee);
  const auto status = ledger_.submit(tx);
  if (status.is_rejected()) {
    if (status.reason == "insufficient balance") {
      throw ServiceError(ErrorCode::WalletUnderfunded,
                         "wallet " + sender.hex() + " cannot cover a fee of " + std::to_string(fee));
    }
    throw ServiceError(ErrorCode::LedgerRejected, "ledger rejected transaction: " + status.reason);
  }
  persist_ledger();
  return {tx.tx_id, status};
}

VerifyOutcome RegistryService::verify_locked(const Digest128& d) const {
  const auto v = contract::verify_certificate(contract_state(), d);
  return VerifyOutcome{v.valid, v.issuer_name, v.revoked, d};
}

// ------------------------------------------------------------------ sessions

std::string RegistryService::login(const std::string& user_id, const std::string& secret) {
  std::lock_guard lock(mu_);
  auto it = accounts_.find(user_id);
  // Hash even for unknown ids so both paths cost the same.
  static const std::array<std::uint8_t, 16> kDummySalt{};
  const bool ok = it != accounts_.end() ? secret_matches(it->second, secret)
                                        : (salted_digest(kDummySalt, secret), false);
  if (!ok) throw ServiceError(ErrorCode::InvalidCredentials, "invalid credentials");
  auto token = random_hex(16);
  sessions_[token] = {user_id, ledger_.tick()};
  return token;
}

void RegistryService::logout(const std::string& token) {
  std::lock_guard lock(mu_);
  if (!find_account(token)) throw ServiceError(ErrorCode::Unauthenticated, "a valid session is required");
  sessions_.erase(token);
}

Session RegistryService::session(const std::string& token) const {
  std::lock_guard lock(mu_);
  const UserAccount* a = find_account(token);
  if (!a) throw ServiceError(ErrorCode::Unauthenticated, "a valid session is required");
  return Session{token, a->user_id, a->role};
}

// --------------------------------------------------------------------- admin

SubmissionReceipt RegistryService::deploy_contract(const std::string& token) {
  std::lock_guard lock(mu_);
  const auto& admin = require_session(token, {Role::Admin});
  if (contract_state().deployed) throw ServiceError(ErrorCode::Conflict, "contract already deployed");
  for (const auto& op : pending_) {
    if (op.kind == PendingOp::Kind::Deploy) throw ServiceError(ErrorCode::Conflict, "deployment already pending");
  }
  const auto receipt = submit_call(*admin.linked_address, contract::Deploy{}, config_.default_fee);
  record({{"type", "pending"}, {"kind", static_cast<int>(PendingOp::Kind::Deploy)}, {"tx_id", receipt.tx_id.hex()}});
  return receipt;
}

UniversityRegistration RegistryService::admin_register_university(const std::string& token, std::string id,
                                                                  const std::string& name, const std::string& email,
                                                                  const std::string& secret) {
  std::lock_guard lock(mu_);
  const auto& admin = require_session(token, {Role::Admin});
  require_text(name, "name");
  require_text(secret, "secret");
  if (id.empty()) id = slug(name);
  require_text(id, "id");
  if (!contract_state().deployed) throw ServiceError(ErrorCode::NotDeployed, "the contract is not deployed yet");
  ensure_free_id(id);
  for (const auto& [uid, info] : universities_) {
    if (lower(accounts_.at(uid).display_name) == lower(name)) {
      throw ServiceError(ErrorCode::Conflict, "university '" + name + "' already exists");
    }
  }

  const Address uni_address = fresh_address();
  const auto receipt = submit_call(*admin.linked_address, contract::RegisterUniversity{name, uni_address},
                                   config_.default_fee);
  auto account = new_account(id, Role::University, name, email, secret);
  account.linked_address = uni_address;
  record({{"type", "account"}, {"account", account_to_event_json(account)}});
  record({{"type", "pending"},
          {"kind", static_cast<int>(PendingOp::Kind::RegisterUniversity)},
          {"tx_id", receipt.tx_id.hex()},
          {"university_id", id}});
  ledger_.faucet(uni_address, config_.faucet_amount);
  persist_ledger();

  UniversityView view{id, name, uni_address, false, 0, ledger_.wallets().balance(uni_address)};
  return {view, receipt};
}

UserAccount RegistryService::admin_add_employer(const std::string& token, const std::string& id,
                                                const std::string& name, const std::string& email,
                                                const std::string& secret) {
  std::lock_guard lock(mu_);
  require_session(token, {Role::Admin});
  require_text(name, "name");
  ensure_free_id(id);
  auto account = new_account(id, Role::Employer, name, email, secret);
  record({{"type", "account"}, {"account", account_to_event_json(account)}});
  return account;
}

std::uint64_t RegistryService::faucet(const std::string& token, const std::string& target, std::uint64_t amount) {
  std::lock_guard lock(mu_);
  require_session(token, {Role::Admin});
  if (amount == 0) throw ServiceError(ErrorCode::InvalidInput, "amount must be positive");
  Address to;
  if (auto it = accounts_.find(target); it != accounts_.end() && it->second.linked_address) {
    to = *it->second.linked_address;
  } else {
    try {
      to = Address::from_hex(target);
    } catch (const std::invalid_argument&) {
      throw ServiceError(ErrorCode::NotFound, "no wallet for '" + target + "'");
    }
  }
  ledger_.faucet(to, amount);
  persist_ledger();
  return ledger_.wallets().balance(to);
}

void RegistryService::operator_faucet(const Address& to, std::uint64_t amount) {
  std::lock_guard lock(mu_);
  ledger_.faucet(to, amount);
  persist_ledger();
}

std::vector<EmailEvent> RegistryService::operator_outbox() const {
  std::lock_guard lock(mu_);
  return outbox_;
}

std::vector<EmailEvent> RegistryService::read_outbox(const std::string& token) const {
  std::lock_guard lock(mu_);
  require_session(token, {Role::Admin});
  return outbox_;
}

std::vector<UniversityView> RegistryService::list_universities() const {
  std::lock_guard lock(mu_);
  std::vector<UniversityView> out;
  for (const auto& [id, info] : universities_) {
    if (!info.confirmed) continue;
    const auto& acc = accounts_.at(id);
    out.push_back({id, acc.display_name, *acc.linked_address, true, info.registered_at,
                   ledger_.wallets().balance(*acc.linked_address)});
  }
  return out;
}

// ---------------------------------------------------------------- university

UserAccount RegistryService::university_add_student(const std::string& token, const std::string& university_id,
                                                    const std::string& student_id, const std::string& name,
                                                    const std::string& email, const std::string& secret) {
  std::lock_guard lock(mu_);
  own_university(token, university_id);
  require_text(name, "name");
  ensure_free_id(student_id);
  auto account = new_account(student_id, Role::Student, name, email, secret);
  account.university_id = university_id;
  record({{"type", "account"}, {"account", account_to_event_json(account)}});
  return account;
}

CertificateReceipt RegistryService::authenticate_certificate(const std::string& token, const std::string& university_id,
                                                             const std::string& student_id, const std::string& title,
                                                             Category category,
                                                             std::span<const std::uint8_t> document,
                                                             std::optional<std::uint64_t> gas_fee) {
  std::lock_guard lock(mu_);
  const auto& uni = own_university(token, university_id);
  auto student = accounts_.find(student_id);
  if (student == accounts_.end() || student->second.role != Role::Student) {
    throw ServiceError(ErrorCode::NotFound, "unknown student '" + student_id + "'");
  }
  if (student->second.university_id != uni.user_id) {
    throw ServiceError(ErrorCode::Forbidden, "student belongs to another university");
  }
  require_text(title, "title");
  if (document.empty()) throw ServiceError(ErrorCode::InvalidInput, "document must not be empty");

  const Digest128 digest = crypto::md5_digest(document);
  const bool pending_same = std::any_of(pending_.begin(), pending_.end(), [&](const PendingOp& op) {
    return op.kind == PendingOp::Kind::StoreCertificate && op.cert_digest == digest;
  });
  if (pending_same || contract_state().certificates.count(digest)) {
    throw ServiceError(ErrorCode::DuplicateDigest, "certificate " + digest.hex() + " is already registered");
  }

  const auto receipt = submit_call(*uni.linked_address, contract::StoreCertificate{digest, student_id},
                                   gas_fee.value_or(config_.default_fee));

  if (dir_.empty()) {
    memory_documents_[digest].assign(document.begin(), document.end());
  } else {
    std::ofstream out(dir_ / "documents" / (digest.hex() + ".bin"), std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(document.data()), static_cast<std::streamsize>(document.size()));
  }
  record({{"type", "pending"},
          {"kind", static_cast<int>(PendingOp::Kind::StoreCertificate)},
          {"tx_id", receipt.tx_id.hex()},
          {"university_id", uni.user_id},
          {"student_id", student_id},
          {"title", title},
          {"category", category_name(category)},
          {"cert_digest", digest.hex()}});
  return {digest, receipt.tx_id, receipt.status};
}

SubmissionReceipt RegistryService::revoke_certificate(const std::string& token, const std::string& university_id,
                                                      const Digest128& cert_digest,
                                                      std::optional<std::uint64_t> gas_fee) {
  std::lock_guard lock(mu_);
  const auto& uni = own_university(token, university_id);
  auto it = contract_state().certificates.find(cert_digest);
  if (it == contract_state().certificates.end()) {
    throw ServiceError(ErrorCode::NotFound, "unknown certificate " + cert_digest.hex());
  }
  if (it->second.issuer != *uni.linked_address) {
    throw ServiceError(ErrorCode::Forbidden, "only the issuing university may revoke");
  }
  if (it->second.revoked) throw ServiceError(ErrorCode::Conflict, "certificate already revoked");
  const auto receipt = submit_call(*uni.linked_address, contract::RevokeCertificate{cert_digest},
                                   gas_fee.value_or(config_.default_fee));
  record({{"type", "pending"},
          {"kind", static_cast<int>(PendingOp::Kind::Revoke)},
          {"tx_id", receipt.tx_id.hex()},
          {"university_id", uni.user_id},
          {"cert_digest", cert_digest.hex()}});
  return receipt;
}

// --------------------------------------------------------------------- reads

VerifyOutcome RegistryService::employer_verify_digest(std::string_view digest_hex) const {
  Digest128 d;
  try {
    d = Digest128::from_hex(digest_hex);
  } catch (const std::invalid_argument&) {
    throw ServiceError(ErrorCode::InvalidInput, "digest must be 32 hexadecimal characters");
  }
  std::lock_guard lock(mu_);
  return verify_locked(d);
}

VerifyOutcome RegistryService::employer_verify_document(std::span<const std::uint8_t> document) const {
  if (document.empty()) throw ServiceError(ErrorCode::InvalidInput, "document must not be empty");
  const auto d = crypto::md5_digest(document);
  std::lock_guard lock(mu_);
  return verify_locked(d);
}

AchievementRecord RegistryService::get_achievement_record(const std::string& token,
                                                          const std::string& student_id) const {
  std::lock_guard lock(mu_);
  const auto& caller = require_session(token, {Role::Student, Role::University, Role::Employer});
  auto it = records_.find(student_id);
  if (it == records_.end()) throw ServiceError(ErrorCode::NotFound, "unknown student '" + student_id + "'");
  if (caller.role == Role::Student && caller.user_id != student_id) {
    throw ServiceError(ErrorCode::Forbidden, "students may read only their own record");
  }
  if (caller.role == Role::University && accounts_.at(student_id).university_id != caller.user_id) {
    throw ServiceError(ErrorCode::Forbidden, "not this university's student");
  }
  AchievementRecord out = it->second;
  for (auto& e : out.entries) e.revoked = verify_locked(e.cert_digest).revoked;
  return out;
}

std::vector<SearchHit> RegistryService::search_students(const std::string& token, const SearchQuery& query) const {
  std::lock_guard lock(mu_);
  require_session(token, {Role::Employer});
  const auto keyword = query.keyword ? lower(*query.keyword) : std::string();
  const auto university = query.university ? lower(*query.university) : std::string();

  std::vector<SearchHit> hits;
  for (const auto& [sid, rec] : records_) {
    SearchHit hit{sid, accounts_.at(sid).display_name, {}};
    for (const auto& e : rec.entries) {
      if (verify_locked(e.cert_digest).revoked) continue;
      if (query.category && e.category != *query.category) continue;
      if (query.university && lower(e.issuer_university) != university && lower(e.issuer_id) != university) continue;
      if (query.keyword && lower(e.title).find(keyword) == std::string::npos) continue;
      hit.entries.push_back(e);
    }
    if (!hit.entries.empty()) hits.push_back(std::move(hit));
  }
  return hits;
}

// --------------------------------------------------------------------- reset

void RegistryService::request_reset(const std::string& user_id) {
  std::lock_guard lock(mu_);
  auto it = accounts_.find(user_id);
  if (it == accounts_.end()) return;
  const auto token = random_hex(16);
  const auto expires = ledger_.tick() + config_.reset_ttl_ticks;
  record({{"type", "reset_issued"}, {"token", token}, {"user_id", user_id}, {"expires_at", expires}});
  EmailEvent mail{outbox_.size() + 1, EmailKind::Reset, it->second.email, "Reset your access credentials",
                  "Use this single-use reset code to choose a new secret: " + token +
                      " (valid until tick " + std::to_string(expires) + ")",
                  ledger_.tick(), false};
  record({{"type", "email"}, {"email", to_json(mail)}});
}

void RegistryService::apply_reset(const std::string& reset_token, const std::string& new_secret) {
  std::lock_guard lock(mu_);
  auto it = resets_.find(reset_token);
  if (it == resets_.end() || it->second.used || ledger_.tick() >= it->second.expires_at) {
    throw ServiceError(ErrorCode::InvalidToken, "invalid token");
  }
  require_text(new_secret, "new secret");
  const auto user_id = it->second.user_id;
  std::array<std::uint8_t, 16> salt;
  for (auto& b : salt) b = static_cast<std::uint8_t>(rng_());
  record({{"type", "reset_used"}, {"token", reset_token}});
  record({{"type", "secret"},
          {"user_id", user_id},
          {"salt", crypto::hex_encode(salt)},
          {"secret_digest", salted_digest(salt, new_secret).hex()}});
  std::erase_if(sessions_, [&](const auto& kv) { return kv.second.first == user_id; });
}

// -------------------------------------------------------------------- ledger

ledger::RoundReport RegistryService::run_round_locked() {
  auto report = ledger_.run_round();
  for (std::size_t i = 0; i < report.block.transactions.size(); ++i) {
    const auto& tx = report.block.transactions[i];
    auto result = contract::execute(replay_.state, tx, report.block.header.index);
    receipts_[tx.tx_id] = result;
    replay_.receipts.push_back({tx.tx_id, report.block.header.index, i, std::move(result)});
  }
  resolve_pending(report.block);
  persist_ledger();
  return report;
}

void RegistryService::resolve_pending(const ledger::Block& block) {
  for (const auto& tx : block.transactions) {
    auto op_it = std::find_if(pending_.begin(), pending_.end(), [&](const PendingOp& op) { return op.tx_id == tx.tx_id; });
    if (op_it == pending_.end()) continue;
    const PendingOp op = *op_it;
    const auto& result = receipts_.at(tx.tx_id);
    record({{"type", "resolved"},
            {"tx_id", tx.tx_id.hex()},
            {"op", kind_name(static_cast<int>(op.kind))},
            {"ok", result.ok},
            {"error", result.error},
            {"block", block.header.index}});
    if (!result.ok) continue;

    if (op.kind == PendingOp::Kind::RegisterUniversity) {
      record({{"type", "university_confirmed"}, {"id", op.university_id}, {"block", block.header.index}});
    } else if (op.kind == PendingOp::Kind::StoreCertificate) {
      if (!verify_locked(op.cert_digest).valid) continue;
      const auto& uni = accounts_.at(op.university_id);
      AchievementEntry entry{op.cert_digest, op.title, op.category, uni.display_name, uni.user_id,
                             tx.tx_id,       block.header.index, false};
      auto entry_json = to_json(entry);
      entry_json.erase("revoked");
      record({{"type", "entry"}, {"student_id", op.student_id}, {"entry", entry_json}});

      const auto& student = accounts_.at(op.student_id);
      EmailEvent mail{outbox_.size() + 1, EmailKind::Certificate, student.email,
                      "Certificate authenticated: " + op.title,
                      "Your certificate \"" + op.title + "\" was authenticated by " + uni.display_name +
                          ". Share this certificate hash with employers for verification: " + op.cert_digest.hex(),
                      ledger_.tick(), false};
      record({{"type", "email"}, {"email", to_json(mail)}});
    }
  }
}

ledger::RoundReport RegistryService::mine_round() {
  std::lock_guard lock(mu_);
  return run_round_locked();
}

std::optional<ledger::RoundReport> RegistryService::mine_if_pending() {
  std::lock_guard lock(mu_);
  if (ledger_.pool().empty()) return std::nullopt;
  return run_round_locked();
}

ChainSummary RegistryService::chain_summary() const {
  std::lock_guard lock(mu_);
  ChainSummary s;
  s.length = ledger_.chain().size();
  s.tip_hash = ledger_.chain().tip().hash;
  s.pending = ledger_.pool().size();
  s.tick = ledger_.tick();
  s.deployed = contract_state().deployed;
  if (s.deployed) s.contract_address = contract_state().contract_address;
  return s;
}

ledger::Chain RegistryService::chain() const {
  std::lock_guard lock(mu_);
  return ledger_.chain();
}

ledger::TxStatus RegistryService::tx_status(const Digest128& tx_id) const {
  std::lock_guard lock(mu_);
  return ledger_.status(tx_id);
}

std::optional<std::vector<std::uint8_t>> RegistryService::stored_document(const Digest128& digest) const {
  std::lock_guard lock(mu_);
  if (dir_.empty()) {
    auto it = memory_documents_.find(digest);
    if (it == memory_documents_.end()) return std::nullopt;
    return it->second;
  }
  std::ifstream in(dir_ / "documents" / (digest.hex() + ".bin"), std::ios::binary);
  if (!in) return std::nullopt;
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

std::uint64_t RegistryService::wallet_balance(const Address& a) const {
  std::lock_guard lock(mu_);
  return ledger_.wallets().balance(a);
}

json RegistryService::state_dump() const {
  std::lock_guard lock(mu_);
  json j;
  auto& accounts = j["accounts"] = json::object();
  for (const auto& [id, a] : accounts_) accounts[id] = account_to_event_json(a);
  auto& unis = j["universities"] = json::object();
  for (const auto& [id, u] : universities_) unis[id] = {{"confirmed", u.confirmed}, {"registered_at", u.registered_at}};
  auto& records = j["records"] = json::object();
  for (const auto& [id, r] : records_) records[id] = to_json(r);
  auto& outbox = j["outbox"] = json::array();
  for (const auto& e : outbox_) outbox.push_back(to_json(e));
  auto& resets = j["resets"] = json::object();
  for (const auto& [t, r] : resets_) resets[t] = {{"user_id", r.user_id}, {"expires_at", r.expires_at}, {"used", r.used}};
  auto& pending = j["pending"] = json::array();
  for (const auto& op : pending_) pending.push_back(op.tx_id.hex());
  auto& failed = j["failed"] = json::object();
  for (const auto& [id, why] : failed_) failed[id.hex()] = why;
  j["sessions"] = sessions_.size();
  j["ledger"] = ledger_.snapshot();
  j["chain"] = ledger::chain_to_jsonl(ledger_.chain());
  return j;
}

}  // namespace arec::service
