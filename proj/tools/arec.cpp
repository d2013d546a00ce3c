// Operator command line for the achievement registry.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <csignal>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <pthread.h>

#include "arec/cli/scenario.hpp"
#include "arec/crypto/md5.hpp"
#include "arec/ledger/chain.hpp"
#include "arec/ledger/serialize.hpp"
#include "arec/service/config.hpp"
#include "arec/service/http_api.hpp"
#include "arec/service/registry_service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace arec;
using cli::kExitFailure;
using cli::kExitOk;
using cli::kExitUsage;

namespace {

struct Globals {
  std::string config_path;
  bool json_output = false;
  service::ConfigOverrides overrides;
};

service::ServiceConfig resolve(const Globals& g) {
  std::optional<json> file;
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) throw std::runtime_error("missing file: " + g.config_path);
    try {
      file = json::parse(in);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(g.config_path + ": " + e.what());
    }
  }
  return service::resolve_config(file, g.overrides);
}

void emit(const Globals& g, const json& j, const std::string& human) {
  if (g.json_output) {
    std::cout << j.dump() << '\n';
  } else {
    std::cout << human << '\n';
  }
}

// ------------------------------------------------------------------- serve

int cmd_serve(const Globals& g) {
  const auto cfg = resolve(g);

  // Signals are taken synchronously by a watcher thread; every other thread
  // inherits the blocked mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::RegistryService svc(cfg);
  httplib::Server server;
  service::mount_api(server, svc);
  if (!cfg.static_dir.empty() && !server.set_mount_point("/", cfg.static_dir)) {
    std::cerr << "error: missing static directory " << cfg.static_dir << '\n';
    return kExitFailure;
  }
  // The library default sets SO_REUSEPORT, which lets a second instance share
  // the port; a busy port must be an error here.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  if (!server.bind_to_port("127.0.0.1", cfg.port)) {
    std::cerr << "error: cannot listen on port " << cfg.port << " (in use?)\n";
    return kExitFailure;
  }

  std::mutex mu;
  std::condition_variable cv;
  bool stopping = false;

  std::thread scheduler([&] {
    if (cfg.round_interval_ms == 0) return;
    std::unique_lock lock(mu);
    while (!cv.wait_for(lock, std::chrono::milliseconds(cfg.round_interval_ms), [&] { return stopping; })) {
      lock.unlock();
      svc.mine_if_pending();
      lock.lock();
    }
  });

  std::thread watcher([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    {
      std::lock_guard lock(mu);
      stopping = true;
    }
    cv.notify_all();
    server.stop();
  });

  std::cerr << "listening on 127.0.0.1:" << cfg.port << '\n';
  server.listen_after_bind();

  {
    std::lock_guard lock(mu);
    stopping = true;
  }
  cv.notify_all();
  scheduler.join();
  if (watcher.joinable()) {
    // listen can also end without a signal; wake the watcher so it exits.
    pthread_kill(watcher.native_handle(), SIGTERM);
    watcher.join();
  }
  svc.flush();
  return kExitOk;
}

// ---------------------------------------------------------------- scenario

int cmd_scenario(const Globals& g, const std::string& file) {
  std::vector<cli::ScenarioStep> steps;
  try {
    steps = cli::parse_scenario_file(file);
  } catch (const cli::ScenarioParseError& e) {
    std::cerr << file << ":" << e.what() << '\n';
    return kExitUsage;
  }
  const auto cfg = resolve(g);
  const auto outcome = cli::run_scenario(steps, cfg, std::cout, g.json_output);
  if (outcome.exit_code != kExitOk) std::cerr << file << ": " << outcome.message << '\n';
  return outcome.exit_code;
}

// ------------------------------------------------------------------- chain

int cmd_chain_inspect(const Globals& g) {
  auto cfg = resolve(g);
  if (cfg.data_dir.empty()) {
    std::cerr << "error: chain inspect needs --data-dir\n";
    return kExitUsage;
  }
  const fs::path dir = cfg.data_dir;
  const auto chain_path = dir / "chain.jsonl";
  if (!fs::exists(chain_path)) {
    std::cerr << "error: missing file " << chain_path.string() << '\n';
    return kExitFailure;
  }
  ledger::ChainParams params{cfg.difficulty, cfg.block_capacity};
  if (const auto snap_path = dir / "ledger.json"; fs::exists(snap_path)) {
    std::ifstream in(snap_path);
    const auto snap = json::parse(in, nullptr, false);
    if (!snap.is_discarded() && snap.contains("params")) {
      params.difficulty = snap["params"].value("difficulty", params.difficulty);
      params.capacity = snap["params"].value("block_capacity", params.capacity);
    }
  }

  ledger::Chain chain;
  try {
    chain = ledger::read_chain_file(chain_path);
  } catch (const ledger::ChainFileError& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kExitFailure;
  }
  const auto verdict = ledger::check_chain(chain, params);

  if (g.json_output) {
    json out{{"file", chain_path.string()}, {"length", chain.size()}, {"valid", static_cast<bool>(verdict)}};
    if (!verdict) {
      out["failed_block"] = verdict.block_index;
      out["fault"] = ledger::fault_name(verdict.fault);
    }
    std::cout << out.dump() << '\n';
  } else {
    for (const auto& b : chain.blocks) {
      std::cout << "#" << b.header.index << "  t=" << b.header.timestamp << "  hash=" << b.hash.hex()
                << "  nonce=" << b.header.nonce << "  txs=" << b.transactions.size() << '\n';
      for (const auto& tx : b.transactions) {
        std::cout << "    " << tx.tx_id.hex() << "  fee=" << tx.gas_fee << "  " << tx.payload << '\n';
      }
    }
    if (verdict) {
      std::cout << "valid: " << chain.size() << " blocks, difficulty " << params.difficulty << '\n';
    } else {
      std::cout << "INVALID at block " << verdict.block_index << ": " << ledger::fault_name(verdict.fault) << '\n';
    }
  }
  return verdict ? kExitOk : kExitFailure;
}

// -------------------------------------------------------------------- hash

int cmd_hash(const Globals& g, const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    std::cerr << "error: missing file " << file << '\n';
    return kExitFailure;
  }
  crypto::Md5 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update(std::span(reinterpret_cast<const std::uint8_t*>(buf.data()), static_cast<std::size_t>(in.gcount())));
  }
  const auto hex = h.finish().hex();
  emit(g, {{"file", file}, {"md5", hex}}, hex + "  " + file);
  return kExitOk;
}

// ------------------------------------------------------------ faucet, mine

int with_data_dir(const Globals& g, const std::function<int(service::RegistryService&)>& body) {
  const auto cfg = resolve(g);
  if (cfg.data_dir.empty()) {
    std::cerr << "error: this command needs --data-dir\n";
    return kExitUsage;
  }
  service::RegistryService svc(cfg);
  const int rc = body(svc);
  svc.flush();
  return rc;
}

int cmd_faucet(const Globals& g, const std::string& address, std::uint64_t amount) {
  ledger::Address to;
  try {
    to = ledger::Address::from_hex(address);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return with_data_dir(g, [&](service::RegistryService& svc) {
    svc.operator_faucet(to, amount);
    const auto balance = svc.wallet_balance(to);
    emit(g, {{"address", address}, {"balance", balance}}, address + " balance " + std::to_string(balance));
    return kExitOk;
  });
}

int cmd_mine(const Globals& g, unsigned rounds) {
  return with_data_dir(g, [&](service::RegistryService& svc) {
    for (unsigned i = 0; i < rounds; ++i) {
      const auto r = svc.mine_round();
      emit(g,
           {{"index", r.block.header.index}, {"hash", r.block.hash.hex()}, {"winner", r.winner},
            {"transactions", r.block.transactions.size()}},
           "mined #" + std::to_string(r.block.header.index) + " " + r.block.hash.hex() + " by node " +
               std::to_string(r.winner) + " (" + std::to_string(r.block.transactions.size()) + " txs)");
    }
    return kExitOk;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Achievement registry: simulated ledger, registry contract and service"};
  app.require_subcommand(1);
  Globals g;
  auto& o = g.overrides;

  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--data-dir", o.data_dir, "Data directory (chain, ledger snapshot, event log)");
  app.add_option("--seed", o.seed, "Seed for every random choice");
  app.add_flag("--json", g.json_output, "Machine-readable output");

  auto* serve = app.add_subcommand("serve", "Run the HTTP service and mining scheduler");
  serve->add_option("--port", o.port, "Listen port");
  serve->add_option("--difficulty", o.difficulty, "Leading zero hex nibbles (0-6)");
  serve->add_option("--capacity", o.block_capacity, "Transactions per block");
  serve->add_option("--round-interval-ms", o.round_interval_ms, "Mining scheduler period; 0 disables it");
  serve->add_option("--reset-ttl", o.reset_ttl_ticks, "Reset token lifetime in ticks");
  serve->add_option("--faucet-amount", o.faucet_amount, "Initial funding for new university wallets");

  auto* scenario = app.add_subcommand("scenario", "Scenario scripts");
  scenario->require_subcommand(1);
  std::string scenario_file;
  auto* scenario_run = scenario->add_subcommand("run", "Run a scenario script");
  scenario_run->add_option("file", scenario_file)->required();
  scenario_run->add_option("--difficulty", o.difficulty, "Leading zero hex nibbles (0-6)");
  scenario_run->add_option("--capacity", o.block_capacity, "Transactions per block");

  auto* chain = app.add_subcommand("chain", "Chain tools");
  chain->require_subcommand(1);
  auto* inspect = chain->add_subcommand("inspect", "Validate and print the chain in --data-dir");

  std::string hash_file;
  auto* hash = app.add_subcommand("hash", "Print a document's MD5 digest");
  hash->add_option("file", hash_file)->required();

  std::string faucet_address;
  std::uint64_t faucet_amount = 0;
  auto* faucet = app.add_subcommand("faucet", "Fund a wallet in --data-dir");
  faucet->add_option("address", faucet_address)->required();
  faucet->add_option("amount", faucet_amount)->required()->check(CLI::PositiveNumber);

  unsigned mine_rounds = 1;
  auto* mine = app.add_subcommand("mine", "Mine rounds on the ledger in --data-dir");
  mine->add_option("rounds", mine_rounds)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    resolve(g);  // a bad config is a usage error for every command
    if (*serve) return cmd_serve(g);
    if (*scenario_run) return cmd_scenario(g, scenario_file);
    if (*inspect) return cmd_chain_inspect(g);
    if (*hash) return cmd_hash(g, hash_file);
    if (*faucet) return cmd_faucet(g, faucet_address, faucet_amount);
    if (*mine) return cmd_mine(g, mine_rounds);
  } catch (const service::StartupError& e) {
    std::cerr << "error: cannot start from data directory: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
