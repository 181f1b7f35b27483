#pragma once

#include <cstdint>
#include <vector>

#include "l2d/decode.hpp"

namespace l2d {

struct LatencyReport {
  unsigned threads = 1;
  std::size_t query_count = 0;
  std::uint32_t repetitions = 0;
  // Mean wall seconds per repetition for the whole batch, after the warmup
  // repetition is discarded.
  double batch_seconds = 0.0;
  // Accumulated per-phase seconds across the timed repetitions.
  double scan_seconds = 0.0;
  double aggregate_seconds = 0.0;
  double rank_seconds = 0.0;
  // Nearest-rank percentiles over per-query latencies, milliseconds.
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double queries_per_second = 0.0;
  // VmRSS after the run; 0 where /proc is unavailable.
  std::uint64_t resident_bytes = 0;
};

// Runs batch_decode `repetitions` times (>= 3, first discarded as warmup)
// and reports wall-clock plus per-phase timings. Results are written to
// *last_results when given so callers can check that timing instrumentation
// does not change what is decoded.
LatencyReport bench_decode(const std::vector<Query>& queries,
                           const MemorySet& m,
                           const ItemRepTable& global_table,
                           const DecodeConfig& cfg, std::uint32_t repetitions,
                           unsigned threads = 1,
                           std::vector<DecodeOutcome>* last_results = nullptr);

// Current VmRSS in bytes, 0 when unknown.
std::uint64_t resident_set_bytes();

}  // namespace l2d
