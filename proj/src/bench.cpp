#include "l2d/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "l2d/error.hpp"
#include "l2d/parallel.hpp"

namespace l2d {

namespace {

double nearest_rank(const std::vector<double>& sorted, double percentile) {
  if (sorted.empty()) return 0.0;
  const double raw = std::ceil(percentile / 100.0 * double(sorted.size()));
  const std::size_t idx =
      std::min<std::size_t>(sorted.size(), std::max(1.0, raw)) - 1;
  return sorted[idx];
}

}  // namespace

std::uint64_t resident_set_bytes() {
#ifdef __linux__
  std::ifstream status("/proc/self/status");
  std::string line;
  while (std::getline(status, line)) {
    if (line.rfind("VmRSS:", 0) == 0) {
      std::uint64_t kb = 0;
      for (char c : line) {
        if (c >= '0' && c <= '9') {
          kb = kb * 10 + std::uint64_t(c - '0');
        } else if (kb != 0) {
          break;
        }
      }
      return kb * 1024;
    }
  }
#endif
  return 0;
}

LatencyReport bench_decode(const std::vector<Query>& queries,
                           const MemorySet& m,
                           const ItemRepTable& global_table,
                           const DecodeConfig& cfg, std::uint32_t repetitions,
                           unsigned threads,
                           std::vector<DecodeOutcome>* last_results) {
  if (repetitions < 3) {
    fail(Errc::invalid_argument,
         "repetitions must be at least 3 (the first is discarded as warmup)");
  }
  if (queries.empty()) fail(Errc::invalid_argument, "no queries to benchmark");

  using Clock = std::chrono::steady_clock;

  LatencyReport report;
  report.threads = effective_threads(threads);
  report.query_count = queries.size();
  report.repetitions = repetitions;

  double total_wall = 0.0;
  std::vector<double> per_query_ms;
  per_query_ms.reserve(std::size_t(repetitions - 1) * queries.size());
  std::vector<PhaseTimes> phases;

  for (std::uint32_t rep = 0; rep < repetitions; ++rep) {
    const auto t0 = Clock::now();
    auto outcomes =
        batch_decode(queries, m, global_table, cfg, threads, &phases);
    const auto t1 = Clock::now();

    for (const DecodeOutcome& out : outcomes) {
      if (!out.ok) fail(Errc::bad_record, "benchmark query failed: " + out.error);
    }
    if (rep + 1 == repetitions && last_results) {
      *last_results = std::move(outcomes);
    }
    if (rep == 0) continue;  // warmup

    total_wall += std::chrono::duration<double>(t1 - t0).count();
    for (const PhaseTimes& p : phases) {
      report.scan_seconds += p.scan_seconds;
      report.aggregate_seconds += p.aggregate_seconds;
      report.rank_seconds += p.rank_seconds;
      per_query_ms.push_back(
          (p.scan_seconds + p.aggregate_seconds + p.rank_seconds) * 1e3);
    }
  }

  const std::uint32_t timed_reps = repetitions - 1;
  report.batch_seconds = total_wall / double(timed_reps);
  std::sort(per_query_ms.begin(), per_query_ms.end());
  report.p50_ms = nearest_rank(per_query_ms, 50.0);
  report.p95_ms = nearest_rank(per_query_ms, 95.0);
  report.queries_per_second =
      total_wall > 0.0
          ? double(std::size_t(timed_reps) * queries.size()) / total_wall
          : 0.0;
  report.resident_bytes = resident_set_bytes();
  return report;
}

}  // namespace l2d
