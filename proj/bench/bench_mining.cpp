// Serial vs OpenMP nonce search, plus raw MD5 throughput.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "arec/crypto/md5.hpp"
#include "arec/ledger/mining.hpp"

namespace {

using arec::ledger::search_nonce_parallel;
using arec::ledger::search_nonce_serial;

// Distinct prefixes so each iteration does a fresh search.
std::string prefix(std::int64_t i) {
  return std::to_string(i) + "|" + std::to_string(i) + "|00000000000000000000000000000000|d41d8cd98f00b204e9800998ecf8427e|";
}

void BM_NonceSerial(benchmark::State& state) {
  const auto difficulty = static_cast<unsigned>(state.range(0));
  std::int64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(search_nonce_serial(prefix(++i), difficulty, 0, UINT64_MAX));
}

void BM_NonceParallel(benchmark::State& state) {
  const auto difficulty = static_cast<unsigned>(state.range(0));
  std::int64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(search_nonce_parallel(prefix(++i), difficulty, 0, UINT64_MAX));
}

void BM_Md5(benchmark::State& state) {
  std::vector<std::uint8_t> data(static_cast<std::size_t>(state.range(0)), 0x5a);
  for (auto _ : state) benchmark::DoNotOptimize(arec::crypto::md5_digest(data));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_NonceSerial)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NonceParallel)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Md5)->Arg(64)->Arg(4096)->Arg(1 << 20);

BENCHMARK_MAIN();
