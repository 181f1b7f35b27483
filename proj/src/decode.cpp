#include "l2d/decode.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "l2d/error.hpp"
#include "l2d/parallel.hpp"

namespace l2d {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

// Dot product in 64-bit with a fixed 4-lane accumulation order, so results
// do not depend on how the optimizer would otherwise reassociate the sum.
double dot_f32(const float* a, const float* b, std::uint32_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::uint32_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += double(a[i]) * double(b[i]);
    s1 += double(a[i + 1]) * double(b[i + 1]);
    s2 += double(a[i + 2]) * double(b[i + 2]);
    s3 += double(a[i + 3]) * double(b[i + 3]);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += double(a[i]) * double(b[i]);
  return ((s0 + s1) + (s2 + s3)) + tail;
}

double sq_norm_f32(const float* a, std::uint32_t n) {
  return dot_f32(a, a, n);
}

// ||q - x||^2 via the expanded form with both norms precomputed; one fused
// scan is about twice as fast as forming the difference. Rounding can push
// the result a hair below zero, hence the clamp.
double expanded_sq_distance(double q_norm, double x_norm, double dot) {
  const double sq = q_norm + x_norm - 2.0 * dot;
  return sq < 0.0 ? 0.0 : sq;
}

struct Candidate {
  double distance;
  std::uint32_t index;  // row or table slot

  bool operator<(const Candidate& other) const {
    return distance != other.distance ? distance < other.distance
                                      : index < other.index;
  }
};

// Keeps the k smallest candidates seen so far; worst at the top.
class BoundedWorstHeap {
 public:
  explicit BoundedWorstHeap(std::size_t k) : k_(k) { heap_.reserve(k); }

  void offer(Candidate c) {
    if (heap_.size() < k_) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end());
      return;
    }
    if (c < heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.back() = c;
      std::push_heap(heap_.begin(), heap_.end());
    }
  }

  // True when a candidate at `distance` could still displace the worst kept
  // entry regardless of its index.
  bool admits(double distance) const {
    return heap_.size() < k_ || distance <= heap_.front().distance;
  }

  std::vector<Candidate> take_sorted() {
    std::sort(heap_.begin(), heap_.end());
    return std::move(heap_);
  }

 private:
  std::size_t k_;
  std::vector<Candidate> heap_;
};

// Top-k table slots by ascending (distance, item id). Slots are stored in
// ascending item order, so slot ties and item ties coincide. `skip` marks
// slots to leave out (used by the backfill pass); pass nullptr for none.
std::vector<Candidate> rank_slots(const float* query, double query_norm,
                                  const ItemRepTable& table, std::uint32_t k,
                                  const std::vector<char>* skip) {
  BoundedWorstHeap heap(k);
  const std::uint32_t dim = table.dim();
  for (std::size_t s = 0; s < table.size(); ++s) {
    if (skip && (*skip)[s]) continue;
    const double dot = dot_f32(query, table.rep_ptr(s), dim);
    const double sq =
        expanded_sq_distance(query_norm, table.rep_sq_norm(s), dot);
    const double dist = std::sqrt(sq);
    if (heap.admits(dist)) {
      heap.offer({dist, std::uint32_t(s)});
    }
  }
  return heap.take_sorted();
}

void require_query_dim(const Query& q, std::uint32_t dim) {
  if (q.vector.size() != dim) {
    fail(Errc::dim_mismatch,
         "query_id " + std::to_string(q.query_id) + ": vector has " +
             std::to_string(q.vector.size()) + " components, expected " +
             std::to_string(dim));
  }
}

}  // namespace

double l2_distance(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    fail(Errc::dim_mismatch, "l2_distance over different lengths");
  }
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= a.size(); i += 4) {
    const double d0 = double(a[i]) - double(b[i]);
    const double d1 = double(a[i + 1]) - double(b[i + 1]);
    const double d2 = double(a[i + 2]) - double(b[i + 2]);
    const double d3 = double(a[i + 3]) - double(b[i + 3]);
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  double tail = 0.0;
  for (; i < a.size(); ++i) {
    const double d = double(a[i]) - double(b[i]);
    tail += d * d;
  }
  return std::sqrt(((s0 + s1) + (s2 + s3)) + tail);
}

double similarity_score(double distance, double epsilon) {
  return 1.0 / (distance + epsilon);
}

NeighborSet top_m_neighbors(const MemorySet& m, const Query& q,
                            std::uint32_t neighbor_count) {
  if (m.count() == 0) fail(Errc::empty_memory, "empty memory");
  if (neighbor_count == 0) {
    fail(Errc::invalid_argument, "neighbor count must be positive");
  }
  require_query_dim(q, m.dim());

  const float* query = q.vector.data();
  const double query_norm = sq_norm_f32(query, m.dim());
  const std::size_t keep = std::min<std::size_t>(neighbor_count, m.count());

  BoundedWorstHeap heap(keep);
  for (std::uint64_t r = 0; r < m.count(); ++r) {
    const double dot = dot_f32(query, m.row_ptr(r), m.dim());
    const double sq = expanded_sq_distance(query_norm, m.row_sq_norm(r), dot);
    const double dist = std::sqrt(sq);
    if (heap.admits(dist)) {
      heap.offer({dist, std::uint32_t(r)});
    }
  }

  NeighborSet neighbors;
  neighbors.reserve(keep);
  for (const Candidate& c : heap.take_sorted()) {
    neighbors.push_back({c.index, c.distance});
  }
  return neighbors;
}

RankedList decode_global(const Query& q, const ItemRepTable& table,
                         std::uint32_t k, double epsilon, PhaseTimes* phases) {
  require_query_dim(q, table.dim());

  const auto t0 = phases ? Clock::now() : Clock::time_point{};
  const double query_norm = sq_norm_f32(q.vector.data(), table.dim());
  const auto ranked =
      rank_slots(q.vector.data(), query_norm, table, k, nullptr);

  RankedList out;
  out.query_id = q.query_id;
  out.entries.reserve(ranked.size());
  for (const Candidate& c : ranked) {
    out.entries.push_back(
        {table.item_at(c.index), similarity_score(c.distance, epsilon)});
  }
  if (phases) phases->rank_seconds += seconds_between(t0, Clock::now());
  return out;
}

RankedList decode_local(const Query& q, const MemorySet& m,
                        const ItemRepTable& global_table,
                        const DecodeConfig& cfg, PhaseTimes* phases) {
  if (cfg.m == 0) {
    fail(Errc::invalid_argument, "local mode needs a neighborhood size");
  }

  auto t0 = phases ? Clock::now() : Clock::time_point{};
  const NeighborSet neighbors = top_m_neighbors(m, q, cfg.m);
  if (phases) {
    const auto t1 = Clock::now();
    phases->scan_seconds += seconds_between(t0, t1);
    t0 = t1;
  }

  const ItemRepTable local_table = local_representations(m, neighbors);
  if (phases) {
    const auto t1 = Clock::now();
    phases->aggregate_seconds += seconds_between(t0, t1);
    t0 = t1;
  }

  const double query_norm = sq_norm_f32(q.vector.data(), m.dim());
  const auto local_ranked =
      rank_slots(q.vector.data(), query_norm, local_table, cfg.k, nullptr);

  RankedList out;
  out.query_id = q.query_id;
  out.entries.reserve(cfg.k);
  for (const Candidate& c : local_ranked) {
    out.entries.push_back({local_table.item_at(c.index),
                           similarity_score(c.distance, cfg.epsilon)});
  }

  // The neighborhood can cover fewer than k items. Completing the tail from
  // the global ranking, restricted to items the local pass did not rank,
  // keeps every locally ranked item strictly ahead of the fill.
  if (cfg.backfill == Backfill::global && out.entries.size() < cfg.k) {
    std::vector<char> skip(global_table.size(), 0);
    for (std::size_t s = 0; s < local_table.size(); ++s) {
      if (auto slot = global_table.slot_of(local_table.item_at(s))) {
        skip[*slot] = 1;
      }
    }
    const auto fill = rank_slots(q.vector.data(), query_norm, global_table,
                                 cfg.k - std::uint32_t(out.entries.size()),
                                 &skip);
    for (const Candidate& c : fill) {
      out.entries.push_back({global_table.item_at(c.index),
                             similarity_score(c.distance, cfg.epsilon)});
    }
  }

  if (phases) phases->rank_seconds += seconds_between(t0, Clock::now());
  return out;
}

RankedList decode_one(const Query& q, const MemorySet& m,
                      const ItemRepTable& global_table,
                      const DecodeConfig& cfg, PhaseTimes* phases) {
  if (cfg.mode == DecodeMode::global) {
    return decode_global(q, global_table, cfg.k, cfg.epsilon, phases);
  }
  return decode_local(q, m, global_table, cfg, phases);
}

std::vector<DecodeOutcome> batch_decode(
    const std::vector<Query>& queries, const MemorySet& m,
    const ItemRepTable& global_table, const DecodeConfig& cfg,
    unsigned threads, std::vector<PhaseTimes>* per_query_phases) {
  std::vector<DecodeOutcome> outcomes(queries.size());
  if (per_query_phases) {
    per_query_phases->assign(queries.size(), PhaseTimes{});
  }
  parallel_for(queries.size(), threads, [&](std::size_t i) {
    PhaseTimes* phases =
        per_query_phases ? &(*per_query_phases)[i] : nullptr;
    try {
      outcomes[i].list = decode_one(queries[i], m, global_table, cfg, phases);
      outcomes[i].ok = true;
    } catch (const std::exception& e) {
      outcomes[i].ok = false;
      outcomes[i].error = e.what();
    }
  });
  return outcomes;
}

}  // namespace l2d
