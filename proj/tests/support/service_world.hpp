#pragma once

// A small populated service shared by the service, HTTP and acceptance tests.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "arec/service/registry_service.hpp"

namespace arec::testing {

inline std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

inline service::ServiceConfig quick_config(unsigned difficulty = 1, std::uint64_t seed = 7) {
  service::ServiceConfig c;
  c.difficulty = difficulty;
  c.seed = seed;
  c.round_interval_ms = 0;
  return c;
}

/// Two confirmed universities, one student each, one employer and a stored
/// certificate for student "s-a". Every actor holds a live session.
struct World {
  explicit World(service::ServiceConfig cfg = quick_config()) : svc(std::move(cfg)) {
    admin = svc.login("admin", "admin");
    svc.deploy_contract(admin);
    svc.mine_round();
    svc.admin_register_university(admin, "uni-a", "Alpha University", "office@alpha.example", "pw-a");
    svc.admin_register_university(admin, "uni-b", "Beta College", "office@beta.example", "pw-b");
    svc.mine_round();
    uni_a = svc.login("uni-a", "pw-a");
    uni_b = svc.login("uni-b", "pw-b");
    svc.university_add_student(uni_a, "uni-a", "s-a", "Ana Andrade", "ana@student.example", "pw-sa");
    svc.university_add_student(uni_b, "uni-b", "s-b", "Ben Brook", "ben@student.example", "pw-sb");
    svc.admin_add_employer(admin, "emp", "Hiring Co", "jobs@hiring.example", "pw-e");
    student_a = svc.login("s-a", "pw-sa");
    student_b = svc.login("s-b", "pw-sb");
    employer = svc.login("emp", "pw-e");
    cert = svc.authenticate_certificate(uni_a, "uni-a", "s-a", "MSc Data Science", service::Category::Academic,
                                        bytes_of(kCertText))
               .cert_digest;
    svc.mine_round();
  }

  static constexpr const char* kCertText = "Alpha University certifies that Ana Andrade holds an MSc in Data Science.";

  service::RegistryService svc;
  std::string admin, uni_a, uni_b, student_a, student_b, employer;
  crypto::Digest128 cert;
};

/// Callers of the authorization matrix. "university" acts for uni-a, whose
/// resources every operation targets; "other_university" is uni-b.
inline const std::vector<std::string>& matrix_callers() {
  static const std::vector<std::string> callers = {"anonymous", "admin",   "university", "other_university",
                                                   "student",   "other_student", "employer"};
  return callers;
}

inline std::string caller_token(const World& w, const std::string& caller) {
  static const std::map<std::string, std::string World::*> members = {
      {"admin", &World::admin},         {"university", &World::uni_a}, {"other_university", &World::uni_b},
      {"student", &World::student_a},   {"other_student", &World::student_b}, {"employer", &World::employer}};
  auto it = members.find(caller);
  return it == members.end() ? std::string("not-a-session") : w.*(it->second);
}

struct MatrixOp {
  std::string name;
  std::vector<std::string> allowed;  // callers that must not get an authorization error
  std::function<void(World&, const std::string& token)> run;
};

/// Every session-checked operation with its allowed callers. Operations that
/// take no session (verify, list_universities, reset, chain status) are
/// public and appear with every caller allowed.
inline std::vector<MatrixOp> matrix_operations() {
  using service::Category;
  const std::vector<std::string> everyone = matrix_callers();
  const std::vector<std::string> signed_in = {"admin",   "university",    "other_university",
                                              "student", "other_student", "employer"};
  return {
      {"logout", signed_in, [](World& w, const std::string& t) { w.svc.logout(t); }},
      {"deploy_contract", {"admin"}, [](World& w, const std::string& t) { w.svc.deploy_contract(t); }},
      {"admin_register_university",
       {"admin"},
       [](World& w, const std::string& t) { w.svc.admin_register_university(t, "uni-c", "Gamma Institute", "", "pw-c"); }},
      {"admin_add_employer",
       {"admin"},
       [](World& w, const std::string& t) { w.svc.admin_add_employer(t, "emp2", "Other Employer", "", "pw-e2"); }},
      {"faucet", {"admin"}, [](World& w, const std::string& t) { w.svc.faucet(t, "uni-a", 5); }},
      {"read_outbox", {"admin"}, [](World& w, const std::string& t) { w.svc.read_outbox(t); }},
      {"list_universities", everyone, [](World& w, const std::string&) { w.svc.list_universities(); }},
      {"university_add_student",
       {"university"},
       [](World& w, const std::string& t) { w.svc.university_add_student(t, "uni-a", "s-new", "New Student", "", "pw"); }},
      {"authenticate_certificate",
       {"university"},
       [](World& w, const std::string& t) {
         w.svc.authenticate_certificate(t, "uni-a", "s-a", "Chess prize", Category::Prize,
                                        bytes_of("Alpha University chess tournament, first place, Ana Andrade"));
       }},
      {"revoke_certificate", {"university"}, [](World& w, const std::string& t) { w.svc.revoke_certificate(t, "uni-a", w.cert); }},
      {"employer_verify", everyone, [](World& w, const std::string&) { w.svc.employer_verify_digest(w.cert.hex()); }},
      {"get_achievement_record",
       {"university", "student", "employer"},
       [](World& w, const std::string& t) { w.svc.get_achievement_record(t, "s-a"); }},
      {"search_students", {"employer"}, [](World& w, const std::string& t) { w.svc.search_students(t, {}); }},
      {"request_reset", everyone, [](World& w, const std::string&) { w.svc.request_reset("s-a"); }},
      {"apply_reset", everyone, [](World& w, const std::string&) {
         try {
           w.svc.apply_reset("00000000000000000000000000000000", "new-pw");
         } catch (const service::ServiceError& e) {
           if (e.code() != service::ErrorCode::InvalidToken) throw;
         }
       }},
      {"mine_round", everyone, [](World& w, const std::string&) { w.svc.mine_round(); }},
      {"chain_status", everyone, [](World& w, const std::string&) { w.svc.chain_summary(); }},
  };
}

struct MatrixCell {
  std::string op, caller;
  bool allowed = false;
  bool ok = false;
  std::string detail;
};

/// Runs every (caller, operation) pair on a fresh world. Denied pairs must
/// raise an authorization error and leave state_dump() unchanged; allowed
/// pairs must not raise one.
inline std::vector<MatrixCell> run_authorization_matrix(const service::ServiceConfig& cfg) {
  std::vector<MatrixCell> cells;
  for (const auto& op : matrix_operations()) {
    for (const auto& caller : matrix_callers()) {
      World w(cfg);
      MatrixCell cell{op.name, caller, false, false, {}};
      cell.allowed = std::find(op.allowed.begin(), op.allowed.end(), caller) != op.allowed.end();
      const auto before = w.svc.state_dump();
      std::optional<service::ServiceError> err;
      try {
        op.run(w, caller_token(w, caller));
      } catch (const service::ServiceError& e) {
        err = e;
      }
      const bool auth_error = err && err->is_authorization();
      if (cell.allowed) {
        cell.ok = !auth_error;
        if (err) cell.detail = err->what();
      } else {
        const bool unchanged = w.svc.state_dump() == before;
        cell.ok = auth_error && unchanged;
        cell.detail = !err ? "succeeded" : !auth_error ? std::string("wrong error: ") + err->what()
                                                       : unchanged ? "" : "state changed";
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace arec::testing
