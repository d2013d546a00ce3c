#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace arec::service {

struct ServiceConfig {
  unsigned difficulty = 3;
  std::size_t block_capacity = 4;
  std::uint64_t round_interval_ms = 1000;
  std::uint64_t reset_ttl_ticks = 10;
  std::uint64_t faucet_amount = 100;
  std::string data_dir;  // empty: in-memory only
  std::uint16_t port = 8080;
  std::uint64_t seed = 0;

  std::size_t node_count = 3;
  std::uint64_t default_fee = 2;
  std::uint64_t admin_funding = 1000;
  std::uint64_t session_ttl_ticks = 1000;
  std::string admin_id = "admin";
  std::string admin_secret = "admin";
  std::string static_dir;  // optional web console assets

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

void to_json(nlohmann::json& j, const ServiceConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, ServiceConfig& c);

ServiceConfig load_config_file(const std::filesystem::path& path);

/// Values given on the command line. Unset fields fall through to the file,
/// then to the built-in default.
struct ConfigOverrides {
  std::optional<unsigned> difficulty;
  std::optional<std::size_t> block_capacity;
  std::optional<std::uint64_t> round_interval_ms;
  std::optional<std::uint64_t> reset_ttl_ticks;
  std::optional<std::uint64_t> faucet_amount;
  std::optional<std::string> data_dir;
  std::optional<std::uint16_t> port;
  std::optional<std::uint64_t> seed;
};

ServiceConfig resolve_config(const std::optional<nlohmann::json>& file, const ConfigOverrides& flags);

}  // namespace arec::service
