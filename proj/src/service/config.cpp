#include "arec/service/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "arec/ledger/types.hpp"

namespace arec::service {

void ServiceConfig::validate() const {
  ledger::ChainParams{difficulty, block_capacity}.validate();
  if (node_count < 1) throw std::invalid_argument("node_count must be at least 1");
  if (default_fee < 1) throw std::invalid_argument("default_fee must be at least 1");
  if (reset_ttl_ticks < 1) throw std::invalid_argument("reset_ttl_ticks must be at least 1");
  if (admin_id.empty() || admin_secret.empty()) throw std::invalid_argument("admin credentials must be set");
}

void to_json(nlohmann::json& j, const ServiceConfig& c) {
  j = nlohmann::json{{"difficulty", c.difficulty},
                     {"block_capacity", c.block_capacity},
                     {"round_interval_ms", c.round_interval_ms},
                     {"reset_ttl_ticks", c.reset_ttl_ticks},
                     {"faucet_amount", c.faucet_amount},
                     {"data_dir", c.data_dir},
                     {"port", c.port},
                     {"seed", c.seed},
                     {"node_count", c.node_count},
                     {"default_fee", c.default_fee},
                     {"admin_funding", c.admin_funding},
                     {"session_ttl_ticks", c.session_ttl_ticks},
                     {"admin_id", c.admin_id},
                     {"admin_secret", c.admin_secret},
                     {"static_dir", c.static_dir}};
}

void from_json(const nlohmann::json& j, ServiceConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const std::set<std::string> known = {
      "difficulty",   "block_capacity",    "round_interval_ms", "reset_ttl_ticks", "faucet_amount",
      "data_dir",     "port",              "seed",              "node_count",      "default_fee",
      "admin_funding", "session_ttl_ticks", "admin_id",         "admin_secret",    "static_dir"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("unknown config key '" + key + "'");
  }
  auto take = [&j](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  take("difficulty", c.difficulty);
  take("block_capacity", c.block_capacity);
  take("round_interval_ms", c.round_interval_ms);
  take("reset_ttl_ticks", c.reset_ttl_ticks);
  take("faucet_amount", c.faucet_amount);
  take("data_dir", c.data_dir);
  take("port", c.port);
  take("seed", c.seed);
  take("node_count", c.node_count);
  take("default_fee", c.default_fee);
  take("admin_funding", c.admin_funding);
  take("session_ttl_ticks", c.session_ttl_ticks);
  take("admin_id", c.admin_id);
  take("admin_secret", c.admin_secret);
  take("static_dir", c.static_dir);
}

ServiceConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  try {
    return nlohmann::json::parse(in).get<ServiceConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

ServiceConfig resolve_config(const std::optional<nlohmann::json>& file, const ConfigOverrides& flags) {
  ServiceConfig c;
  if (file) c = file->get<ServiceConfig>();
  if (flags.difficulty) c.difficulty = *flags.difficulty;
  if (flags.block_capacity) c.block_capacity = *flags.block_capacity;
  if (flags.round_interval_ms) c.round_interval_ms = *flags.round_interval_ms;
  if (flags.reset_ttl_ticks) c.reset_ttl_ticks = *flags.reset_ttl_ticks;
  if (flags.faucet_amount) c.faucet_amount = *flags.faucet_amount;
  if (flags.data_dir) c.data_dir = *flags.data_dir;
  if (flags.port) c.port = *flags.port;
  if (flags.seed) c.seed = *flags.seed;
  c.validate();
  return c;
}

}  // namespace arec::service
