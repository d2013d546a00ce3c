#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "arec/ledger/types.hpp"

namespace arec::ledger {

class ChainFileError : public std::runtime_error {
 public:
  ChainFileError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

nlohmann::ordered_json transaction_to_json(const Transaction& tx);
Transaction transaction_from_json(const nlohmann::json& j);

nlohmann::ordered_json block_to_json(const Block& block);
Block block_from_json(const nlohmann::json& j);

/// One block per line, field order fixed.
std::string chain_to_jsonl(const Chain& chain);
Chain chain_from_jsonl(const std::string& text, const std::string& file_label = "<memory>");

void write_chain_file(const std::filesystem::path& path, const Chain& chain);
Chain read_chain_file(const std::filesystem::path& path);

}  // namespace arec::ledger
