#include "arec/ledger/serialize.hpp"

#include <fstream>
#include <sstream>

namespace arec::ledger {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json transaction_to_json(const Transaction& tx) {
  ordered_json j;
  j["tx_id"] = tx.tx_id.hex();
  j["sender"] = tx.sender.hex();
  j["target"] = tx.target.hex();
  // Embedded as an object; json::dump() reproduces the canonical form.
  j["payload"] = ordered_json::parse(json::parse(tx.payload).dump());
  j["gas_fee"] = tx.gas_fee;
  return j;
}

Transaction transaction_from_json(const json& j) {
  Transaction tx;
  tx.tx_id = Digest128::from_hex(j.at("tx_id").get<std::string>());
  tx.sender = Address::from_hex(j.at("sender").get<std::string>());
  tx.target = Address::from_hex(j.at("target").get<std::string>());
  tx.payload = j.at("payload").dump();
  tx.gas_fee = j.at("gas_fee").get<std::uint64_t>();
  return tx;
}

ordered_json block_to_json(const Block& block) {
  ordered_json j;
  j["index"] = block.header.index;
  j["timestamp"] = block.header.timestamp;
  j["prev_hash"] = block.header.prev_hash.hex();
  j["tx_root"] = block.header.tx_root.hex();
  j["nonce"] = block.header.nonce;
  j["hash"] = block.hash.hex();
  auto& txs = j["transactions"] = ordered_json::array();
  for (const auto& tx : block.transactions) txs.push_back(transaction_to_json(tx));
  return j;
}

Block block_from_json(const json& j) {
  Block b;
  b.header.index = j.at("index").get<std::uint64_t>();
  b.header.timestamp = j.at("timestamp").get<std::uint64_t>();
  b.header.prev_hash = Digest128::from_hex(j.at("prev_hash").get<std::string>());
  b.header.tx_root = Digest128::from_hex(j.at("tx_root").get<std::string>());
  b.header.nonce = j.at("nonce").get<std::uint64_t>();
  b.hash = Digest128::from_hex(j.at("hash").get<std::string>());
  for (const auto& tx : j.at("transactions")) b.transactions.push_back(transaction_from_json(tx));
  return b;
}

std::string chain_to_jsonl(const Chain& chain) {
  std::string out;
  for (const auto& b : chain.blocks) {
    out += block_to_json(b).dump();
    out += '\n';
  }
  return out;
}

Chain chain_from_jsonl(const std::string& text, const std::string& file_label) {
  Chain chain;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      chain.blocks.push_back(block_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw ChainFileError(file_label, lineno, e.what());
    }
  }
  if (chain.blocks.empty()) throw ChainFileError(file_label, 0, "no blocks");
  return chain;
}

void write_chain_file(const std::filesystem::path& path, const Chain& chain) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << chain_to_jsonl(chain);
  }
  std::filesystem::rename(tmp, path);
}

Chain read_chain_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ChainFileError(path.string(), 0, "cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return chain_from_jsonl(buf.str(), path.string());
}

}  // namespace arec::ledger
