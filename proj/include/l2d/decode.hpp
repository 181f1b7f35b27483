#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "l2d/aggregate.hpp"
#include "l2d/memory.hpp"

namespace l2d {

// A test sample's hidden state.
struct Query {
  std::uint64_t query_id = 0;
  std::vector<float> vector;
};

enum class DecodeMode { global, local };

// What to do in local mode when the neighborhood covers fewer than K items:
// fill the tail from the global ranking, or return a shorter list.
enum class Backfill { global, truncate };

struct DecodeConfig {
  DecodeMode mode = DecodeMode::global;
  std::uint32_t k = 10;
  std::uint32_t m = 0;  // neighborhood size, local mode only
  Backfill backfill = Backfill::global;
  double epsilon = 1e-9;  // guards the reciprocal score at zero distance
};

struct ScoredItem {
  ItemId item = 0;
  double score = 0.0;
};

// Top-K answer for one query, best first. Ranking is by ascending L2
// distance with ties broken by ascending item id; the reciprocal score is
// derived from the same distance, so the orderings coincide.
struct RankedList {
  std::uint64_t query_id = 0;
  std::vector<ScoredItem> entries;
};

// Wall time spent per phase of one decode. Pointers to this are accepted by
// the decode entry points; passing nullptr skips the clock reads entirely,
// so instrumented and plain runs compute identical results.
struct PhaseTimes {
  double scan_seconds = 0.0;       // neighbor search over memory rows
  double aggregate_seconds = 0.0;  // local mean construction
  double rank_seconds = 0.0;       // candidate scoring and selection
};

// Euclidean distance, accumulated in 64-bit. Errors on length mismatch.
double l2_distance(std::span<const float> a, std::span<const float> b);

// 1 / (distance + epsilon); finite at zero distance, strictly decreasing.
double similarity_score(double distance, double epsilon);

// The M rows nearest to the query, exact, ascending by (distance, row).
// Returns all rows when M >= N. Errors on an empty memory.
NeighborSet top_m_neighbors(const MemorySet& m, const Query& q,
                            std::uint32_t neighbor_count);

// Ranks every item in the table against the query; top K (fewer if the
// table is smaller).
RankedList decode_global(const Query& q, const ItemRepTable& table,
                         std::uint32_t k, double epsilon = 1e-9,
                         PhaseTimes* phases = nullptr);

// Local aggregation decode: top-M neighborhood, per-item local means, then
// ranking. With cfg.backfill == Backfill::global the tail is completed from
// the global ranking over items outside the neighborhood, always after every
// locally ranked item. With m >= N the output is identical to decode_global.
RankedList decode_local(const Query& q, const MemorySet& m,
                        const ItemRepTable& global_table,
                        const DecodeConfig& cfg, PhaseTimes* phases = nullptr);

// Dispatches on cfg.mode.
RankedList decode_one(const Query& q, const MemorySet& m,
                      const ItemRepTable& global_table, const DecodeConfig& cfg,
                      PhaseTimes* phases = nullptr);

struct DecodeOutcome {
  bool ok = false;
  RankedList list;
  std::string error;  // set when !ok
};

// Decodes every query, in input order, optionally across threads. Outputs
// are identical to sequential single-query decoding; a malformed query
// yields an error outcome without aborting the batch. If per_query_phases
// is given it is resized to the batch and each query writes its own slot.
std::vector<DecodeOutcome> batch_decode(
    const std::vector<Query>& queries, const MemorySet& m,
    const ItemRepTable& global_table, const DecodeConfig& cfg,
    unsigned threads = 1, std::vector<PhaseTimes>* per_query_phases = nullptr);

}  // namespace l2d
