#include <doctest.h>

#include <thread>

#include <httplib.h>

#include "arec/crypto/md5.hpp"
#include "arec/ledger/serialize.hpp"
#include "arec/service/http_api.hpp"
#include "support/service_world.hpp"

using namespace arec;
using namespace arec::testing;
using nlohmann::json;

namespace {

// Serves the API on an ephemeral port for the lifetime of the object.
class LiveServer {
 public:
  explicit LiveServer(service::ServiceConfig cfg = quick_config()) : svc(std::move(cfg)) {
    service::mount_api(server_, svc);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LiveServer() {
    server_.stop();
    thread_.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(10);
    return c;
  }

  service::RegistryService svc;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

httplib::Headers auth(const std::string& token) { return {{"Authorization", "Bearer " + token}}; }

json post(httplib::Client& c, const std::string& path, const json& body, const std::string& token, int expect) {
  auto res = c.Post(path, auth(token), body.dump(), "application/json");
  REQUIRE(res);
  INFO(path << " -> " << res->body);
  CHECK(res->status == expect);
  return json::parse(res->body);
}

json get(httplib::Client& c, const std::string& path, const std::string& token, int expect) {
  auto res = c.Get(path, auth(token));
  REQUIRE(res);
  INFO(path << " -> " << res->body);
  CHECK(res->status == expect);
  return json::parse(res->body);
}

std::string login(httplib::Client& c, const std::string& user, const std::string& secret) {
  return post(c, "/login", {{"user_id", user}, {"secret", secret}}, "", 200).at("token").get<std::string>();
}

}  // namespace

TEST_CASE("full flow over HTTP, multipart upload included") {
  LiveServer live;
  auto c = live.client();

  const auto admin = login(c, "admin", "admin");
  post(c, "/admin/deploy", json::object(), admin, 202);
  live.svc.mine_round();
  const auto reg = post(c, "/admin/universities",
                        {{"id", "uni-h"}, {"name", "Harbor University"}, {"email", "h@x"}, {"secret", "pw-h"}}, admin, 202);
  CHECK(reg["receipt"]["status"]["status"] == "pending");
  CHECK(get(c, "/universities", "", 200).empty());
  live.svc.mine_round();
  const auto unis = get(c, "/universities", "", 200);
  REQUIRE(unis.size() == 1);
  CHECK(unis[0]["name"] == "Harbor University");

  const auto uni = login(c, "uni-h", "pw-h");
  post(c, "/universities/uni-h/students",
       {{"student_id", "st-1"}, {"name", "Sam Tide"}, {"email", "sam@x"}, {"secret", "pw-st"}}, uni, 201);

  const std::string doc = "Harbor University awards Sam Tide the Diploma in Marine Engineering.";
  httplib::MultipartFormDataItems form = {
      {"metadata", json{{"student_id", "st-1"}, {"title", "Diploma"}, {"category", "academic"}}.dump(), "", "application/json"},
      {"document", doc, "diploma.pdf", "application/pdf"},
  };
  auto res = c.Post("/universities/uni-h/certificates", auth(uni), form);
  REQUIRE(res);
  CHECK(res->status == 202);
  const auto receipt = json::parse(res->body);
  const auto digest = crypto::md5_digest(std::string_view(doc)).hex();
  CHECK(receipt["cert_digest"] == digest);

  const auto tx = receipt["tx_id"].get<std::string>();
  CHECK(get(c, "/chain/status/" + tx, "", 200)["status"] == "pending");
  live.svc.mine_round();
  const auto status = get(c, "/chain/status/" + tx, "", 200);
  CHECK(status["status"] == "confirmed");
  CHECK(status["block_index"] == 3);

  const auto outbox = get(c, "/admin/outbox", admin, 200);
  REQUIRE(outbox.size() == 1);
  CHECK(outbox[0]["body"].get<std::string>().find(digest) != std::string::npos);

  const auto student = login(c, "st-1", "pw-st");
  const auto record = get(c, "/students/st-1/record", student, 200);
  REQUIRE(record["entries"].size() == 1);
  CHECK(record["entries"][0]["cert_digest"] == digest);

  const auto v = post(c, "/verify", {{"digest", digest}}, "", 200);
  CHECK(v["valid"] == true);
  CHECK(v["issuer_name"] == "Harbor University");
  auto by_doc = c.Post("/verify", httplib::MultipartFormDataItems{{"document", doc, "d.pdf", "application/pdf"}});
  REQUIRE(by_doc);
  CHECK(json::parse(by_doc->body)["valid"] == true);
  CHECK(post(c, "/verify", {{"digest", std::string(32, 'a')}}, "", 200)["valid"] == false);

  post(c, "/admin/employers", {{"id", "emp-h"}, {"name", "Dock Co"}, {"secret", "pw-e"}}, admin, 201);
  const auto emp = login(c, "emp-h", "pw-e");
  CHECK(get(c, "/students/search?category=academic&university=uni-h&keyword=diploma", emp, 200).size() == 1);
  CHECK(get(c, "/students/search?category=prize", emp, 200).empty());

  post(c, "/universities/uni-h/certificates/" + digest + "/revoke", json::object(), uni, 202);
  live.svc.mine_round();
  const auto after = post(c, "/verify", {{"digest", digest}}, "", 200);
  CHECK(after["valid"] == false);
  CHECK(after["revoked"] == true);

  const auto chain = get(c, "/chain", "", 200);
  CHECK(chain["length"] == 5);
  CHECK(chain["blocks"].size() == 5);
  // Blocks keep the chain file's field order.
  auto raw = c.Get("/chain");
  REQUIRE(raw);
  const auto ordered = nlohmann::ordered_json::parse(raw->body);
  CHECK(ordered["blocks"][0].begin().key() == "index");
  CHECK(ordered["blocks"][0].dump() == ledger::block_to_json(live.svc.chain().blocks[0]).dump());
}

TEST_CASE("errors carry a code and a message") {
  LiveServer live;
  auto c = live.client();
  auto err = post(c, "/login", {{"user_id", "admin"}, {"secret", "bad"}}, "", 401);
  CHECK(err["error"] == "invalid_credentials");
  CHECK(err["message"].is_string());

  CHECK(get(c, "/admin/outbox", "", 401)["error"] == "unauthenticated");
  const auto admin = login(c, "admin", "admin");
  CHECK(post(c, "/admin/universities", {{"name", "X"}, {"secret", "y"}}, admin, 409)["error"] == "not_deployed");
  CHECK(post(c, "/verify", {{"digest", "xyz"}}, "", 400)["error"] == "invalid_input");
  CHECK(post(c, "/admin/faucet", {{"address", "nothex"}, {"amount", 5}}, admin, 404)["error"] == "not_found");
  CHECK(get(c, "/chain/status/zz", "", 400)["error"] == "invalid_input");
  CHECK(post(c, "/reset/apply", {{"token", "abc"}, {"new_secret", "x"}}, "", 400)["error"] == "invalid_token");

  auto res = c.Post("/login", "{not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(json::parse(res->body)["error"] == "invalid_input");

  // Certificates must be multipart.
  CHECK(post(c, "/universities/u/certificates", {{"student_id", "s"}}, admin, 400)["error"] == "invalid_input");
}

TEST_CASE("role checks over HTTP") {
  auto cfg = quick_config();
  LiveServer live(cfg);
  auto c = live.client();
  const auto admin = login(c, "admin", "admin");
  post(c, "/admin/deploy", json::object(), admin, 202);
  live.svc.mine_round();
  post(c, "/admin/universities", {{"id", "u1"}, {"name", "U One"}, {"secret", "pw"}}, admin, 202);
  live.svc.mine_round();
  const auto uni = login(c, "u1", "pw");
  CHECK(post(c, "/admin/deploy", json::object(), uni, 403)["error"] == "forbidden");
  CHECK(get(c, "/admin/outbox", uni, 403)["error"] == "forbidden");
  CHECK(post(c, "/universities/u1/students", {{"student_id", "s"}, {"name", "S"}, {"secret", "p"}}, admin, 403)["error"] ==
        "forbidden");
  CHECK(get(c, "/students/search", uni, 403)["error"] == "forbidden");
  post(c, "/logout", json::object(), uni, 200);
  CHECK(get(c, "/students/search", uni, 401)["error"] == "unauthenticated");
}

TEST_CASE("reset over HTTP") {
  LiveServer live;
  auto c = live.client();
  post(c, "/reset/request", {{"user_id", "admin"}}, "", 202);
  post(c, "/reset/request", {{"user_id", "nobody"}}, "", 202);
  const auto mails = live.svc.operator_outbox();
  REQUIRE(mails.size() == 1);
  const auto code = service::hex_tokens(mails[0].body).front();
  const auto old = login(c, "admin", "admin");
  post(c, "/reset/apply", {{"token", code}, {"new_secret", "n3w"}}, "", 200);
  post(c, "/reset/apply", {{"token", code}, {"new_secret", "again"}}, "", 400);
  post(c, "/login", {{"user_id", "admin"}, {"secret", "admin"}}, "", 401);
  get(c, "/admin/outbox", old, 401);
  login(c, "admin", "n3w");
}
