#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "arec/crypto/hex.hpp"
#include "arec/crypto/md5.hpp"
#include "arec/ledger/serialize.hpp"
#include "arec/service/registry_service.hpp"
#include "support/service_world.hpp"
#include "support/temp_dir.hpp"

using namespace arec;
using namespace arec::testing;
using service::Category;
using service::ErrorCode;
using service::RegistryService;
using service::ServiceError;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.code();
  }
  FAIL("expected a ServiceError");
  return ErrorCode::InvalidInput;
}

std::size_t emails_to(const RegistryService& svc, const std::string& to) {
  const auto mails = svc.operator_outbox();
  return static_cast<std::size_t>(std::count_if(mails.begin(), mails.end(), [&](const auto& m) { return m.to == to; }));
}

bool chain_mentions(const ledger::Chain& chain, const std::string& needle) {
  return ledger::chain_to_jsonl(chain).find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("login checks the secret and hides which part was wrong") {
  RegistryService svc(quick_config());
  CHECK(code_of([&] { svc.login("admin", "nope"); }) == ErrorCode::InvalidCredentials);
  CHECK(code_of([&] { svc.login("ghost", "admin"); }) == ErrorCode::InvalidCredentials);
  const auto t = svc.login("admin", "admin");
  CHECK(svc.session(t).role == service::Role::Admin);
  svc.logout(t);
  CHECK(code_of([&] { svc.session(t); }) == ErrorCode::Unauthenticated);
}

TEST_CASE("universities need a deployed contract and show up once confirmed") {
  RegistryService svc(quick_config());
  const auto admin = svc.login("admin", "admin");
  CHECK(code_of([&] { svc.admin_register_university(admin, "u", "U", "", "pw"); }) == ErrorCode::NotDeployed);

  const auto deploy = svc.deploy_contract(admin);
  CHECK(deploy.status.is_pending());
  CHECK(code_of([&] { svc.deploy_contract(admin); }) == ErrorCode::Conflict);
  svc.mine_round();
  CHECK(svc.tx_status(deploy.tx_id).is_confirmed());
  CHECK(svc.chain_summary().deployed);

  const auto reg = svc.admin_register_university(admin, "", "Delta Polytechnic", "d@x", "pw");
  CHECK(reg.university.id == "delta-polytechnic");
  CHECK(svc.list_universities().empty());
  const auto uni = svc.login("delta-polytechnic", "pw");
  CHECK(code_of([&] { svc.university_add_student(uni, "delta-polytechnic", "s", "S", "", "pw"); }) ==
        ErrorCode::Forbidden);

  svc.mine_round();
  const auto unis = svc.list_universities();
  REQUIRE(unis.size() == 1);
  CHECK(unis[0].name == "Delta Polytechnic");
  CHECK(unis[0].confirmed);
  CHECK(code_of([&] { svc.admin_register_university(admin, "other", "delta polytechnic", "", "pw"); }) ==
        ErrorCode::Conflict);
  CHECK(code_of([&] { svc.admin_register_university(admin, "delta-polytechnic", "Else", "", "pw"); }) ==
        ErrorCode::Conflict);
}

TEST_CASE("authenticated certificate reaches record, email and verification") {
  World w;
  const auto& svc = w.svc;
  CHECK(w.cert == crypto::md5_digest(std::string_view(World::kCertText)));

  const auto rec = svc.get_achievement_record(w.student_a, "s-a");
  REQUIRE(rec.entries.size() == 1);
  CHECK(rec.entries[0].cert_digest == w.cert);
  CHECK(rec.entries[0].issuer_university == "Alpha University");
  CHECK_FALSE(rec.entries[0].revoked);

  const auto mails = svc.operator_outbox();
  REQUIRE(mails.size() == 1);
  CHECK(mails[0].to == "ana@student.example");
  CHECK(mails[0].kind == service::EmailKind::Certificate);
  CHECK(mails[0].body.find(w.cert.hex()) != std::string::npos);

  const auto v = svc.employer_verify_digest(w.cert.hex());
  CHECK(v.valid);
  CHECK(v.issuer_name == std::optional<std::string>("Alpha University"));
  CHECK(svc.employer_verify_document(bytes_of(World::kCertText)).valid);
  CHECK_FALSE(svc.employer_verify_digest("0123456789abcdef0123456789abcdef").valid);
  CHECK(code_of([&] { svc.employer_verify_digest("not-hex"); }) == ErrorCode::InvalidInput);
  CHECK(code_of([&] { svc.employer_verify_digest(w.cert.hex().substr(1)); }) == ErrorCode::InvalidInput);
}

TEST_CASE("a pending certificate is not yet verifiable or on the record") {
  World w;
  const auto r = w.svc.authenticate_certificate(w.uni_a, "uni-a", "s-a", "Volunteering", Category::Voluntary,
                                                bytes_of("Ana volunteered 200 hours at the Alpha food bank."));
  CHECK(r.status.is_pending());
  CHECK_FALSE(w.svc.employer_verify_digest(r.cert_digest.hex()).valid);
  CHECK(w.svc.get_achievement_record(w.student_a, "s-a").entries.size() == 1);
  w.svc.mine_round();
  CHECK(w.svc.employer_verify_digest(r.cert_digest.hex()).valid);
  CHECK(w.svc.get_achievement_record(w.student_a, "s-a").entries.size() == 2);
}

TEST_CASE("duplicate documents are refused while pending and once stored") {
  World w;
  const auto doc = bytes_of("A second certificate text for Ana, long enough to matter.");
  CHECK(code_of([&] {
          w.svc.authenticate_certificate(w.uni_a, "uni-a", "s-a", "Dup", Category::Academic, bytes_of(World::kCertText));
        }) == ErrorCode::DuplicateDigest);
  w.svc.authenticate_certificate(w.uni_a, "uni-a", "s-a", "Once", Category::Academic, doc);
  CHECK(code_of([&] { w.svc.authenticate_certificate(w.uni_a, "uni-a", "s-a", "Twice", Category::Academic, doc); }) ==
        ErrorCode::DuplicateDigest);
}

TEST_CASE("universities act only on their own students") {
  World w;
  CHECK(code_of([&] {
          w.svc.authenticate_certificate(w.uni_a, "uni-a", "s-b", "X", Category::Academic, bytes_of("some document"));
        }) == ErrorCode::Forbidden);
  CHECK(code_of([&] {
          w.svc.authenticate_certificate(w.uni_a, "uni-a", "nobody", "X", Category::Academic, bytes_of("some document"));
        }) == ErrorCode::NotFound);
  CHECK(code_of([&] { w.svc.authenticate_certificate(w.uni_a, "uni-a", "s-a", "X", Category::Academic, {}); }) ==
        ErrorCode::InvalidInput);
  CHECK(code_of([&] { w.svc.get_achievement_record(w.uni_b, "s-a"); }) == ErrorCode::Forbidden);
  CHECK(code_of([&] { w.svc.get_achievement_record(w.student_b, "s-a"); }) == ErrorCode::Forbidden);
  CHECK(code_of([&] { w.svc.get_achievement_record(w.employer, "nobody"); }) == ErrorCode::NotFound);
  CHECK(w.svc.get_achievement_record(w.employer, "s-a").entries.size() == 1);
  CHECK(w.svc.get_achievement_record(w.uni_a, "s-a").entries.size() == 1);
}

TEST_CASE("underfunded submission leaves no trace anywhere") {
  auto cfg = quick_config();
  cfg.faucet_amount = 3;  // one fee of 2 fits, a second does not
  World w(cfg);
  const auto before = w.svc.state_dump();
  const std::string doc = "Beta-era transcript for Ana: this one cannot be paid for.";
  const auto digest = crypto::md5_digest(std::string_view(doc));

  CHECK(code_of([&] {
          w.svc.authenticate_certificate(w.uni_a, "uni-a", "s-a", "Unpaid", Category::Academic, bytes_of(doc));
        }) == ErrorCode::WalletUnderfunded);
  // The ledger remembers the rejection for status queries; nothing else moves.
  auto after = w.svc.state_dump();
  const auto rejected = after["ledger"]["rejected"];
  REQUIRE(rejected.size() == 1);
  CHECK(rejected.begin().value() == "insufficient balance");
  after["ledger"]["rejected"] = nlohmann::json::object();
  CHECK((after == before));
  for (int i = 0; i < 3; ++i) w.svc.mine_round();

  CHECK_FALSE(chain_mentions(w.svc.chain(), digest.hex()));
  CHECK(w.svc.get_achievement_record(w.student_a, "s-a").entries.size() == 1);
  CHECK(emails_to(w.svc, "ana@student.example") == 1);
  CHECK_FALSE(w.svc.employer_verify_digest(digest.hex()).valid);
  CHECK_FALSE(w.svc.stored_document(digest).has_value());

  // Topping up makes the same submission go through.
  w.svc.faucet(w.admin, "uni-a", 10);
  w.svc.authenticate_certificate(w.uni_a, "uni-a", "s-a", "Paid", Category::Academic, bytes_of(doc));
  w.svc.mine_round();
  CHECK(w.svc.employer_verify_digest(digest.hex()).valid);
}

TEST_CASE("revocation by the issuer flips verification and the record") {
  World w;
  CHECK(code_of([&] { w.svc.revoke_certificate(w.uni_b, "uni-b", w.cert); }) == ErrorCode::Forbidden);
  CHECK(code_of([&] { w.svc.revoke_certificate(w.uni_b, "uni-a", w.cert); }) == ErrorCode::Forbidden);
  CHECK(code_of([&] { w.svc.revoke_certificate(w.uni_a, "uni-a", crypto::Digest128::zero()); }) ==
        ErrorCode::NotFound);
  CHECK(w.svc.employer_verify_digest(w.cert.hex()).valid);

  const auto r = w.svc.revoke_certificate(w.uni_a, "uni-a", w.cert);
  w.svc.mine_round();
  CHECK(w.svc.tx_status(r.tx_id).is_confirmed());
  const auto v = w.svc.employer_verify_digest(w.cert.hex());
  CHECK_FALSE(v.valid);
  CHECK(v.revoked);
  const auto rec = w.svc.get_achievement_record(w.student_a, "s-a");
  REQUIRE(rec.entries.size() == 1);
  CHECK(rec.entries[0].revoked);
  CHECK(code_of([&] { w.svc.revoke_certificate(w.uni_a, "uni-a", w.cert); }) == ErrorCode::Conflict);
}

TEST_CASE("employer search filters by category, university and keyword") {
  World w;
  w.svc.authenticate_certificate(w.uni_b, "uni-b", "s-b", "Debate championship", Category::Prize,
                                 bytes_of("Beta College debate championship winner: Ben Brook"));
  w.svc.authenticate_certificate(w.uni_a, "uni-a", "s-a", "Data ethics workshop", Category::Employability,
                                 bytes_of("Ana Andrade completed the Alpha data ethics workshop"));
  w.svc.mine_round();

  auto ids = [&](service::SearchQuery q) {
    std::vector<std::string> out;
    for (const auto& h : w.svc.search_students(w.employer, q)) out.push_back(h.student_id);
    return out;
  };
  CHECK(ids({}) == std::vector<std::string>{"s-a", "s-b"});
  CHECK(ids({Category::Prize, {}, {}}) == std::vector<std::string>{"s-b"});
  CHECK(ids({{}, std::string("alpha university"), {}}) == std::vector<std::string>{"s-a"});
  CHECK(ids({{}, std::string("uni-b"), {}}) == std::vector<std::string>{"s-b"});
  CHECK(ids({{}, {}, std::string("DATA")}) == std::vector<std::string>{"s-a"});
  CHECK(ids({Category::Academic, std::string("uni-b"), {}}).empty());

  w.svc.revoke_certificate(w.uni_b, "uni-b", crypto::md5_digest(std::string_view(
                                                 "Beta College debate championship winner: Ben Brook")));
  w.svc.mine_round();
  CHECK(ids({Category::Prize, {}, {}}).empty());
}

TEST_CASE("reset tokens are single use, expire, and end old sessions") {
  auto cfg = quick_config();
  cfg.reset_ttl_ticks = 3;
  World w(cfg);
  auto latest_code = [&] {
    const auto mails = w.svc.operator_outbox();
    REQUIRE(mails.back().kind == service::EmailKind::Reset);
    return service::hex_tokens(mails.back().body).front();
  };

  const auto mail_count = w.svc.operator_outbox().size();
  w.svc.request_reset("nobody");
  CHECK(w.svc.operator_outbox().size() == mail_count);

  w.svc.request_reset("s-a");
  const auto code = latest_code();
  CHECK(w.svc.operator_outbox().back().to == "ana@student.example");
  w.svc.apply_reset(code, "fresh-secret");
  CHECK(code_of([&] { w.svc.apply_reset(code, "again"); }) == ErrorCode::InvalidToken);
  CHECK(code_of([&] { w.svc.login("s-a", "pw-sa"); }) == ErrorCode::InvalidCredentials);
  CHECK(code_of([&] { w.svc.session(w.student_a); }) == ErrorCode::Unauthenticated);
  CHECK(w.svc.session(w.student_b).user_id == "s-b");
  CHECK_FALSE(w.svc.login("s-a", "fresh-secret").empty());

  w.svc.request_reset("s-b");
  const auto stale = latest_code();
  for (int i = 0; i < 3; ++i) w.svc.mine_round();
  CHECK(code_of([&] { w.svc.apply_reset(stale, "late"); }) == ErrorCode::InvalidToken);
  CHECK_FALSE(w.svc.login("s-b", "pw-sb").empty());

  w.svc.request_reset("s-b");
  const auto in_time = latest_code();
  for (int i = 0; i < 2; ++i) w.svc.mine_round();
  w.svc.apply_reset(in_time, "still-in-time");
  CHECK(code_of([&] { w.svc.apply_reset("not-a-token", "x"); }) == ErrorCode::InvalidToken);
}

TEST_CASE("authorization matrix: denied pairs fail cleanly, allowed pairs pass") {
  const auto cells = run_authorization_matrix(quick_config());
  CHECK(cells.size() == matrix_operations().size() * matrix_callers().size());
  for (const auto& c : cells) {
    INFO(c.op << " as " << c.caller << " (" << (c.allowed ? "allowed" : "denied") << "): " << c.detail);
    CHECK(c.ok);
  }
}

TEST_CASE("every operation name appears in the matrix") {
  std::set<std::string> in_matrix;
  for (const auto& op : matrix_operations()) in_matrix.insert(op.name);
  for (const auto op : service::kOperations) {
    if (op == "login") continue;  // creates sessions; has no caller
    CHECK_MESSAGE(in_matrix.count(std::string(op)), op);
  }
}

TEST_CASE("persisted state survives a restart") {
  TempDir dir;
  auto cfg = quick_config();
  cfg.data_dir = dir.str();
  nlohmann::json before;
  {
    World w(cfg);
    w.svc.request_reset("s-b");
    w.svc.flush();
    before = w.svc.state_dump();
  }
  RegistryService again(cfg);
  auto after = again.state_dump();
  before.erase("sessions");
  after.erase("sessions");
  CHECK(after == before);
  CHECK(again.employer_verify_digest(crypto::md5_digest(std::string_view(World::kCertText)).hex()).valid);
  const auto doc = again.stored_document(crypto::md5_digest(std::string_view(World::kCertText)));
  REQUIRE(doc.has_value());
  CHECK(*doc == bytes_of(World::kCertText));
  CHECK_FALSE(again.login("s-a", "pw-sa").empty());

  // The ledger keeps going from where it stopped.
  const auto length = again.chain().size();
  again.mine_round();
  CHECK(again.chain().size() == length + 1);
}

TEST_CASE("persisted parameters win over the config on restart") {
  TempDir dir;
  auto cfg = quick_config(2);
  cfg.data_dir = dir.str();
  { RegistryService svc(cfg); svc.mine_round(); }
  auto other = cfg;
  other.difficulty = 1;
  other.block_capacity = 9;
  RegistryService svc(other);
  CHECK(svc.config().difficulty == 2);
  CHECK(svc.config().block_capacity == 4);
}

TEST_CASE("secrets and documents never reach persisted files") {
  TempDir dir;
  auto cfg = quick_config();
  cfg.data_dir = dir.str();
  {
    World w(cfg);
    w.svc.request_reset("s-a");
    w.svc.flush();
  }
  const auto events = slurp(dir / "events.jsonl");
  const auto chain = slurp(dir / "chain.jsonl");
  const auto ledger = slurp(dir / "ledger.json");
  for (const std::string secret : {"pw-a", "pw-b", "pw-sa", "pw-sb", "pw-e"}) {
    CAPTURE(secret);
    CHECK(events.find("\"" + secret + "\"") == std::string::npos);
    CHECK(chain.find(secret) == std::string::npos);
    CHECK(ledger.find(secret) == std::string::npos);
  }
  CHECK(chain.find("Ana Andrade holds") == std::string::npos);
  CHECK(events.find("Ana Andrade holds") == std::string::npos);
}

TEST_CASE("chain bytes carry digests, never documents") {
  World w;
  std::mt19937_64 rng(99);
  std::vector<std::vector<std::uint8_t>> docs;
  for (int i = 0; i < 20; ++i) {
    std::vector<std::uint8_t> doc(33 + rng() % 400);
    for (auto& b : doc) b = static_cast<std::uint8_t>(rng());
    w.svc.faucet(w.admin, "uni-a", 10);
    w.svc.authenticate_certificate(w.uni_a, "uni-a", "s-a", "Doc " + std::to_string(i), Category::Academic, doc);
    docs.push_back(doc);
  }
  for (int i = 0; i < 6; ++i) w.svc.mine_round();
  const auto bytes = ledger::chain_to_jsonl(w.svc.chain());
  for (const auto& doc : docs) {
    CHECK(w.svc.employer_verify_document(doc).valid);
    CHECK(std::search(bytes.begin(), bytes.end(), doc.begin(), doc.end()) == bytes.end());
    const std::string hex = crypto::hex_encode(doc);
    CHECK(bytes.find(hex) == std::string::npos);
  }
}

TEST_CASE("corrupt data directories are refused with the file named") {
  TempDir dir;
  auto cfg = quick_config();
  cfg.data_dir = dir.str();
  { World w(cfg); w.svc.flush(); }

  auto refused_file = [&](const std::string& name, const std::string& content) {
    TempDir copy;
    std::filesystem::copy(dir.path(), copy.path(), std::filesystem::copy_options::recursive);
    spit(copy / name, content);
    auto c = cfg;
    c.data_dir = copy.str();
    try {
      RegistryService svc(c);
    } catch (const service::StartupError& e) {
      return e.file().filename().string();
    }
    return std::string("(started)");
  };
  CHECK(refused_file("events.jsonl", slurp(dir / "events.jsonl") + "{not json\n") == "events.jsonl");
  CHECK(refused_file("chain.jsonl", "{\"index\":0}\n") == "chain.jsonl");
  CHECK(refused_file("ledger.json", "[]") == "ledger.json");

  auto chain = slurp(dir / "chain.jsonl");
  const auto pos = chain.find("\"nonce\":");
  chain[pos + 8] = chain[pos + 8] == '1' ? '2' : '1';
  CHECK(refused_file("chain.jsonl", chain) == "chain.jsonl");
}

TEST_CASE("identical seeds and inputs give identical files") {
  TempDir a, b;
  auto run = [](const TempDir& d) {
    auto cfg = quick_config(2, 42);
    cfg.data_dir = d.str();
    World w(cfg);
    w.svc.revoke_certificate(w.uni_a, "uni-a", w.cert);
    w.svc.request_reset("s-b");
    w.svc.mine_round();
    w.svc.flush();
  };
  run(a);
  run(b);
  for (const std::string f : {"chain.jsonl", "ledger.json", "events.jsonl"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
}
