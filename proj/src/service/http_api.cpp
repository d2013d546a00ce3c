#include "arec/service/http_api.hpp"

#include <functional>

#include "arec/ledger/serialize.hpp"

namespace arec::service {
namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, http_status(code), {{"error", error_code_name(code)}, {"message", message}});
}

std::string bearer(const httplib::Request& req) {
  const auto header = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (header.rfind(kPrefix, 0) == 0) return header.substr(kPrefix.size());
  return {};
}

json body_json(const httplib::Request& req) {
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) throw ServiceError(ErrorCode::InvalidInput, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error&) {
    throw ServiceError(ErrorCode::InvalidInput, "request body is not valid JSON");
  }
}

std::string field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ServiceError(ErrorCode::InvalidInput, std::string("missing string field '") + key + "'");
  }
  return j[key].get<std::string>();
}

std::optional<std::uint64_t> optional_u64(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  if (!j[key].is_number_unsigned()) {
    throw ServiceError(ErrorCode::InvalidInput, std::string("field '") + key + "' must be a positive integer");
  }
  return j[key].get<std::uint64_t>();
}

std::span<const std::uint8_t> bytes_of(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Maps ServiceError and stray exceptions onto the error body.
httplib::Server::Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e.code(), e.what());
    } catch (const std::invalid_argument& e) {
      send_error(res, ErrorCode::InvalidInput, e.what());
    }
  };
}

}  // namespace

void mount_api(httplib::Server& server, RegistryService& svc) {
  server.Post("/login", guarded([&svc](const auto& req, auto& res) {
    const auto body = body_json(req);
    const auto token = svc.login(field(body, "user_id"), field(body, "secret"));
    const auto s = svc.session(token);
    send_json(res, 200, {{"token", token}, {"user_id", s.user_id}, {"role", role_name(s.role)}});
  }));

  server.Post("/logout", guarded([&svc](const auto& req, auto& res) {
    svc.logout(bearer(req));
    send_json(res, 200, json::object());
  }));

  server.Post("/reset/request", guarded([&svc](const auto& req, auto& res) {
    svc.request_reset(field(body_json(req), "user_id"));
    send_json(res, 202, json::object());
  }));

  server.Post("/reset/apply", guarded([&svc](const auto& req, auto& res) {
    const auto body = body_json(req);
    svc.apply_reset(field(body, "token"), field(body, "new_secret"));
    send_json(res, 200, json::object());
  }));

  server.Post("/admin/deploy", guarded([&svc](const auto& req, auto& res) {
    send_json(res, 202, to_json(svc.deploy_contract(bearer(req))));
  }));

  server.Post("/admin/universities", guarded([&svc](const auto& req, auto& res) {
    const auto body = body_json(req);
    const auto reg = svc.admin_register_university(bearer(req), body.value("id", ""), field(body, "name"),
                                                   body.value("email", ""), field(body, "secret"));
    send_json(res, 202, {{"university", to_json(reg.university)}, {"receipt", to_json(reg.receipt)}});
  }));

  server.Post("/admin/employers", guarded([&svc](const auto& req, auto& res) {
    const auto body = body_json(req);
    const auto acc = svc.admin_add_employer(bearer(req), field(body, "id"), field(body, "name"),
                                            body.value("email", ""), field(body, "secret"));
    send_json(res, 201, to_json(acc));
  }));

  server.Post("/admin/faucet", guarded([&svc](const auto& req, auto& res) {
    const auto body = body_json(req);
    const auto amount = optional_u64(body, "amount");
    if (!amount) throw ServiceError(ErrorCode::InvalidInput, "missing field 'amount'");
    std::string target = body.contains("university_id") ? field(body, "university_id") : field(body, "address");
    const auto balance = svc.faucet(bearer(req), target, *amount);
    send_json(res, 200, {{"target", target}, {"balance", balance}});
  }));

  server.Get("/admin/outbox", guarded([&svc](const auto& req, auto& res) {
    auto out = json::array();
    for (const auto& e : svc.read_outbox(bearer(req))) out.push_back(to_json(e));
    send_json(res, 200, out);
  }));

  server.Get("/universities", guarded([&svc](const auto&, auto& res) {
    auto out = json::array();
    for (const auto& u : svc.list_universities()) out.push_back(to_json(u));
    send_json(res, 200, out);
  }));

  server.Post(R"(/universities/([^/]+)/students)", guarded([&svc](const auto& req, auto& res) {
    const auto body = body_json(req);
    const auto acc = svc.university_add_student(bearer(req), req.matches[1], field(body, "student_id"),
                                                field(body, "name"), body.value("email", ""), field(body, "secret"));
    send_json(res, 201, to_json(acc));
  }));

  server.Post(R"(/universities/([^/]+)/certificates)", guarded([&svc](const auto& req, auto& res) {
    if (!req.is_multipart_form_data() || !req.has_file("metadata") || !req.has_file("document")) {
      throw ServiceError(ErrorCode::InvalidInput, "expected multipart fields 'metadata' and 'document'");
    }
    json meta;
    try {
      meta = json::parse(req.get_file_value("metadata").content);
    } catch (const json::parse_error&) {
      throw ServiceError(ErrorCode::InvalidInput, "metadata is not valid JSON");
    }
    const auto doc = req.get_file_value("document").content;
    const auto receipt = svc.authenticate_certificate(bearer(req), req.matches[1], field(meta, "student_id"),
                                                      field(meta, "title"), parse_category(field(meta, "category")),
                                                      bytes_of(doc), optional_u64(meta, "gas_fee"));
    send_json(res, 202, to_json(receipt));
  }));

  server.Post(R"(/universities/([^/]+)/certificates/([0-9a-fA-F]{32})/revoke)",
              guarded([&svc](const auto& req, auto& res) {
                std::optional<std::uint64_t> fee;
                if (!req.body.empty()) fee = optional_u64(body_json(req), "gas_fee");
                const auto receipt = svc.revoke_certificate(bearer(req), req.matches[1],
                                                            Digest128::from_hex(req.matches[2].str()), fee);
                send_json(res, 202, to_json(receipt));
              }));

  server.Get("/students/search", guarded([&svc](const auto& req, auto& res) {
    SearchQuery q;
    if (auto v = req.get_param_value("category"); !v.empty()) q.category = parse_category(v);
    if (auto v = req.get_param_value("university"); !v.empty()) q.university = v;
    if (auto v = req.get_param_value("keyword"); !v.empty()) q.keyword = v;
    auto out = json::array();
    for (const auto& h : svc.search_students(bearer(req), q)) out.push_back(to_json(h));
    send_json(res, 200, out);
  }));

  server.Get(R"(/students/([^/]+)/record)", guarded([&svc](const auto& req, auto& res) {
    send_json(res, 200, to_json(svc.get_achievement_record(bearer(req), req.matches[1])));
  }));

  server.Post("/verify", guarded([&svc](const auto& req, auto& res) {
    VerifyOutcome v;
    if (req.is_multipart_form_data()) {
      if (!req.has_file("document")) throw ServiceError(ErrorCode::InvalidInput, "expected multipart field 'document'");
      v = svc.employer_verify_document(bytes_of(req.get_file_value("document").content));
    } else {
      v = svc.employer_verify_digest(field(body_json(req), "digest"));
    }
    send_json(res, 200, to_json(v));
  }));

  server.Get("/chain", guarded([&svc](const auto&, auto& res) {
    const auto summary = svc.chain_summary();
    auto body = nlohmann::ordered_json::parse(to_json(summary).dump());
    auto& blocks = body["blocks"] = nlohmann::ordered_json::array();
    for (const auto& b : svc.chain().blocks) blocks.push_back(ledger::block_to_json(b));
    res.status = 200;
    res.set_content(body.dump(), "application/json");
  }));

  server.Get(R"(/chain/status/([^/]+))", guarded([&svc](const auto& req, auto& res) {
    Digest128 id;
    try {
      id = Digest128::from_hex(req.matches[1].str());
    } catch (const std::invalid_argument&) {
      throw ServiceError(ErrorCode::InvalidInput, "tx_id must be 32 hexadecimal characters");
    }
    auto body = to_json(svc.tx_status(id));
    body["tx_id"] = id.hex();
    send_json(res, 200, body);
  }));
}

}  // namespace arec::service
