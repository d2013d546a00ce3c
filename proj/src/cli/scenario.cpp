#include "arec/cli/scenario.hpp"

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "arec/crypto/hex.hpp"
#include "arec/ledger/chain.hpp"
#include "arec/service/registry_service.hpp"

namespace arec::cli {

using nlohmann::json;
using service::ErrorCode;
using service::RegistryService;
using service::ServiceError;

namespace {

class AssertionFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::uint8_t> to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

struct Context {
  RegistryService& svc;
  std::map<std::string, std::string> vars;
  std::map<std::string, std::string> sessions;

  // "$name" strings are replaced by saved variables.
  json substitute(const json& j) const {
    if (j.is_string()) {
      const auto s = j.get<std::string>();
      if (s.size() > 1 && s[0] == '$') {
        auto it = vars.find(s.substr(1));
        if (it == vars.end()) throw AssertionFailed("undefined variable " + s);
        return it->second;
      }
      return j;
    }
    if (j.is_object() || j.is_array()) {
      json out = j;
      for (auto& v : out) v = substitute(v);
      return out;
    }
    return j;
  }

  std::string token(const json& a) const {
    if (!a.contains("session")) return {};
    const auto name = a.at("session").get<std::string>();
    auto it = sessions.find(name);
    // Unknown aliases behave like an anonymous caller.
    return it == sessions.end() ? std::string() : it->second;
  }

  void save(const json& a, const char* key, const std::string& value) {
    if (a.contains(key)) vars[a.at(key).get<std::string>()] = value;
  }
};

std::string str(const json& a, const char* key) {
  if (!a.contains(key) || !a.at(key).is_string()) {
    throw AssertionFailed(std::string("missing string argument '") + key + "'");
  }
  return a.at(key).get<std::string>();
}

std::string str_or(const json& a, const char* key, const std::string& fallback) {
  return a.contains(key) ? a.at(key).get<std::string>() : fallback;
}

void expect_eq(const json& a, const char* key, const json& actual) {
  if (a.contains(key) && a.at(key) != actual) {
    throw AssertionFailed(std::string("expected ") + key + " = " + a.at(key).dump() + ", got " + actual.dump());
  }
}

std::vector<std::uint8_t> document_arg(const json& a) {
  if (a.contains("document")) return to_bytes(a.at("document").get<std::string>());
  if (a.contains("document_hex")) return crypto::hex_decode(a.at("document_hex").get<std::string>());
  if (a.contains("document_file")) {
    std::ifstream in(a.at("document_file").get<std::string>(), std::ios::binary);
    if (!in) throw AssertionFailed("cannot read " + a.at("document_file").get<std::string>());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
  }
  throw AssertionFailed("missing document argument");
}

json run_step(Context& ctx, const std::string& verb, const json& a) {
  auto& svc = ctx.svc;
  const auto tok = ctx.token(a);

  if (verb == "login") {
    const auto user = str(a, "user");
    const auto t = svc.login(user, str(a, "secret"));
    ctx.sessions[str_or(a, "as", user)] = t;
    return {{"user", user}};
  }
  if (verb == "logout") {
    svc.logout(tok);
    return json::object();
  }
  if (verb == "deploy") {
    const auto r = svc.deploy_contract(tok);
    ctx.save(a, "save_tx", r.tx_id.hex());
    return service::to_json(r);
  }
  if (verb == "register_university") {
    const auto reg = svc.admin_register_university(tok, str_or(a, "id", ""), str(a, "name"), str_or(a, "email", ""),
                                                   str(a, "secret"));
    ctx.save(a, "save", reg.university.id);
    ctx.save(a, "save_tx", reg.receipt.tx_id.hex());
    return service::to_json(reg.university);
  }
  if (verb == "add_employer") {
    return service::to_json(svc.admin_add_employer(tok, str(a, "id"), str(a, "name"), str_or(a, "email", ""),
                                                   str(a, "secret")));
  }
  if (verb == "faucet") {
    const auto balance = svc.faucet(tok, str(a, "target"), a.at("amount").get<std::uint64_t>());
    expect_eq(a, "balance", balance);
    return {{"balance", balance}};
  }
  if (verb == "outbox") {
    const auto mails = svc.read_outbox(tok);
    expect_eq(a, "count", mails.size());
    if (a.contains("contains")) {
      const auto needle = a.at("contains").get<std::string>();
      bool found = false;
      for (const auto& m : mails) found = found || m.body.find(needle) != std::string::npos;
      if (!found) throw AssertionFailed("no email contains '" + needle + "'");
    }
    if (a.contains("to")) {
      const auto to = a.at("to").get<std::string>();
      bool found = false;
      for (const auto& m : mails) found = found || m.to == to;
      if (!found) throw AssertionFailed("no email sent to '" + to + "'");
    }
    if (a.contains("save")) {
      // The newest email carrying a digest or code, as the reader would copy it.
      for (auto it = mails.rbegin(); it != mails.rend(); ++it) {
        if (a.contains("to") && it->to != a.at("to").get<std::string>()) continue;
        const auto tokens = service::hex_tokens(it->body);
        if (tokens.empty()) continue;
        ctx.vars[a.at("save").get<std::string>()] = tokens.front();
        break;
      }
      if (!ctx.vars.count(a.at("save").get<std::string>())) throw AssertionFailed("no email carries a hex code");
    }
    return {{"count", mails.size()}};
  }
  if (verb == "universities") {
    const auto unis = svc.list_universities();
    expect_eq(a, "count", unis.size());
    if (a.contains("contains")) {
      const auto name = a.at("contains").get<std::string>();
      bool found = false;
      for (const auto& u : unis) found = found || u.name == name;
      if (!found) throw AssertionFailed("university '" + name + "' is not listed");
    }
    return {{"count", unis.size()}};
  }
  if (verb == "add_student") {
    return service::to_json(svc.university_add_student(tok, str(a, "university"), str(a, "student_id"),
                                                       str(a, "name"), str_or(a, "email", ""), str(a, "secret")));
  }
  if (verb == "authenticate") {
    const auto doc = document_arg(a);
    std::optional<std::uint64_t> fee;
    if (a.contains("fee")) fee = a.at("fee").get<std::uint64_t>();
    const auto r = svc.authenticate_certificate(tok, str(a, "university"), str(a, "student"), str(a, "title"),
                                                service::parse_category(str_or(a, "category", "academic")), doc, fee);
    ctx.save(a, "save", r.cert_digest.hex());
    ctx.save(a, "save_tx", r.tx_id.hex());
    return service::to_json(r);
  }
  if (verb == "revoke") {
    const auto r = svc.revoke_certificate(tok, str(a, "university"), crypto::Digest128::from_hex(str(a, "digest")));
    ctx.save(a, "save_tx", r.tx_id.hex());
    return service::to_json(r);
  }
  if (verb == "verify") {
    const auto v = a.contains("digest") ? svc.employer_verify_digest(str(a, "digest"))
                                        : svc.employer_verify_document(document_arg(a));
    expect_eq(a, "expect", v.valid);
    expect_eq(a, "expect_revoked", v.revoked);
    if (a.contains("expect_issuer")) expect_eq(a, "expect_issuer", v.issuer_name ? json(*v.issuer_name) : json());
    return service::to_json(v);
  }
  if (verb == "record") {
    const auto r = svc.get_achievement_record(tok, str(a, "student"));
    expect_eq(a, "entries", r.entries.size());
    std::size_t revoked = 0;
    for (const auto& e : r.entries) revoked += e.revoked ? 1 : 0;
    expect_eq(a, "revoked", revoked);
    if (a.contains("contains")) {
      const auto d = a.at("contains").get<std::string>();
      bool found = false;
      for (const auto& e : r.entries) found = found || e.cert_digest.hex() == d;
      if (!found) throw AssertionFailed("record has no entry " + d);
    }
    return service::to_json(r);
  }
  if (verb == "search") {
    service::SearchQuery q;
    if (a.contains("category")) q.category = service::parse_category(str(a, "category"));
    if (a.contains("university")) q.university = str(a, "university");
    if (a.contains("keyword")) q.keyword = str(a, "keyword");
    const auto hits = svc.search_students(tok, q);
    expect_eq(a, "hits", hits.size());
    auto out = json::array();
    for (const auto& h : hits) out.push_back(h.student_id);
    return {{"students", out}};
  }
  if (verb == "request_reset") {
    svc.request_reset(str(a, "user"));
    if (a.contains("save")) {
      // Pull the newest reset code out of the outbox, as the user would.
      const auto mails = svc.operator_outbox();
      for (auto it = mails.rbegin(); it != mails.rend(); ++it) {
        if (it->kind != service::EmailKind::Reset) continue;
        const auto tokens = service::hex_tokens(it->body);
        if (!tokens.empty()) ctx.vars[a.at("save").get<std::string>()] = tokens.front();
        break;
      }
    }
    return json::object();
  }
  if (verb == "apply_reset") {
    svc.apply_reset(str(a, "token"), str(a, "secret"));
    return json::object();
  }
  if (verb == "mine") {
    const auto rounds = a.value("rounds", 1);
    json winners = json::array();
    for (int i = 0; i < rounds; ++i) winners.push_back(svc.mine_round().winner);
    return {{"winners", winners}};
  }
  if (verb == "status") {
    const auto s = svc.tx_status(crypto::Digest128::from_hex(str(a, "tx")));
    expect_eq(a, "expect", s.label());
    return service::to_json(s);
  }
  if (verb == "chain") {
    const auto chain = svc.chain();
    const auto& cfg = svc.config();
    const bool valid = ledger::validate_chain(chain, {cfg.difficulty, cfg.block_capacity});
    expect_eq(a, "valid", valid);
    expect_eq(a, "length", chain.size());
    return {{"valid", valid}, {"length", chain.size()}};
  }
  throw AssertionFailed("unhandled verb " + verb);
}

}  // namespace

const std::map<std::string, std::string>& scenario_verbs() {
  static const std::map<std::string, std::string> verbs = {
      {"login", "login"},
      {"logout", "logout"},
      {"deploy", "deploy_contract"},
      {"register_university", "admin_register_university"},
      {"add_employer", "admin_add_employer"},
      {"faucet", "faucet"},
      {"outbox", "read_outbox"},
      {"universities", "list_universities"},
      {"add_student", "university_add_student"},
      {"authenticate", "authenticate_certificate"},
      {"revoke", "revoke_certificate"},
      {"verify", "employer_verify"},
      {"record", "get_achievement_record"},
      {"search", "search_students"},
      {"request_reset", "request_reset"},
      {"apply_reset", "apply_reset"},
      {"mine", "mine_round"},
      {"status", "chain_status"},
      {"chain", "chain_status"},
  };
  return verbs;
}

std::vector<ScenarioStep> parse_scenario(std::string_view text) {
  std::vector<ScenarioStep> steps;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = trim(raw);
    if (line.empty() || line[0] == '#') continue;

    const auto space = line.find_first_of(" \t");
    ScenarioStep step;
    step.line = lineno;
    step.verb = line.substr(0, space);
    if (!scenario_verbs().count(step.verb)) throw ScenarioParseError(lineno, "unknown verb '" + step.verb + "'");
    const auto rest = space == std::string::npos ? std::string() : trim(line.substr(space));
    try {
      step.args = rest.empty() ? json::object() : json::parse(rest);
    } catch (const json::parse_error& e) {
      throw ScenarioParseError(lineno, std::string("bad JSON arguments: ") + e.what());
    }
    if (!step.args.is_object()) throw ScenarioParseError(lineno, "arguments must be a JSON object");
    steps.push_back(std::move(step));
  }
  return steps;
}

std::vector<ScenarioStep> parse_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

ScenarioOutcome run_scenario(const std::vector<ScenarioStep>& steps, const service::ServiceConfig& config,
                             std::ostream& out, bool json_output) {
  ScenarioOutcome outcome;
  RegistryService svc(config);
  Context ctx{svc, {}, {}};

  for (const auto& step : steps) {
    json entry{{"line", step.line}, {"verb", step.verb}};
    try {
      const auto args = ctx.substitute(step.args);
      const bool wants_error = args.contains("expect_error");
      try {
        entry["result"] = run_step(ctx, step.verb, args);
        if (wants_error) {
          throw AssertionFailed("expected error '" + args.at("expect_error").get<std::string>() +
                                "' but the step succeeded");
        }
      } catch (const ServiceError& e) {
        if (!wants_error) throw;
        const auto want = args.at("expect_error").get<std::string>();
        // "authorization" matches either authorization code.
        const bool match = want == service::error_code_name(e.code()) || (want == "authorization" && e.is_authorization());
        if (!match) {
          throw AssertionFailed("expected error '" + want + "', got '" +
                                std::string(service::error_code_name(e.code())) + "': " + e.what());
        }
        entry["error"] = service::error_code_name(e.code());
      }
      entry["ok"] = true;
    } catch (const std::exception& e) {
      entry["ok"] = false;
      entry["message"] = e.what();
      outcome.exit_code = kExitFailure;
      outcome.failed_line = step.line;
      outcome.message = "line " + std::to_string(step.line) + " (" + step.verb + "): " + e.what();
    }
    ++outcome.steps_run;
    if (json_output) {
      out << entry.dump() << '\n';
    } else if (entry["ok"].get<bool>()) {
      out << "ok    line " << step.line << ": " << step.verb << '\n';
    } else {
      out << "FAIL  " << outcome.message << '\n';
    }
    outcome.log.push_back(std::move(entry));
    if (outcome.exit_code != kExitOk) break;
  }
  return outcome;
}

}  // namespace arec::cli
