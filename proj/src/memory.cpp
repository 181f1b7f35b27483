#include "l2d/memory.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "l2d/error.hpp"
#include "l2d/rng.hpp"

namespace l2d {

MemorySet MemorySet::build(RecordSource& records, std::uint32_t dim) {
  if (dim == 0) fail(Errc::invalid_argument, "dim must be positive");

  MemorySet m;
  m.dim_ = dim;
  std::unordered_set<std::uint64_t> seen_ids;

  while (auto rec = records.next()) {
    if (rec->vector.size() != dim) {
      fail(Errc::dim_mismatch,
           "sample_id " + std::to_string(rec->sample_id) + ": vector has " +
               std::to_string(rec->vector.size()) + " components, expected " +
               std::to_string(dim));
    }
    for (float x : rec->vector) {
      if (!std::isfinite(x)) {
        fail(Errc::bad_record, "sample_id " + std::to_string(rec->sample_id) +
                                   ": non-finite vector component");
      }
    }
    if (!seen_ids.insert(rec->sample_id).second) {
      fail(Errc::duplicate_sample,
           "sample_id " + std::to_string(rec->sample_id) + ": duplicate");
    }
    m.item_of_row_.push_back(m.catalog_.add_occurrence(rec->item));
    m.matrix_.insert(m.matrix_.end(), rec->vector.begin(), rec->vector.end());
  }

  m.finalize_derived();
  return m;
}

MemorySet MemorySet::build(const std::vector<MemoryRecord>& records,
                           std::uint32_t dim) {
  VectorRecordSource source(records);
  return build(source, dim);
}

MemorySet MemorySet::from_parts(std::uint32_t dim, std::vector<float> matrix,
                                std::vector<ItemId> item_of_row,
                                ItemCatalog catalog) {
  if (dim == 0) fail(Errc::invalid_argument, "dim must be positive");
  if (matrix.size() != item_of_row.size() * static_cast<std::size_t>(dim)) {
    fail(Errc::invalid_argument, "matrix size does not match row count x dim");
  }
  MemorySet m;
  m.dim_ = dim;
  m.matrix_ = std::move(matrix);
  m.item_of_row_ = std::move(item_of_row);
  m.catalog_ = std::move(catalog);
  m.finalize_derived();
  return m;
}

void MemorySet::finalize_derived() {
  item_index_.assign(catalog_.size(), {});
  for (std::uint32_t r = 0; r < item_of_row_.size(); ++r) {
    item_index_[item_of_row_[r]].push_back(r);
  }
  row_sq_norms_.resize(item_of_row_.size());
  for (std::uint64_t r = 0; r < item_of_row_.size(); ++r) {
    const float* p = matrix_.data() + r * dim_;
    double acc = 0.0;
    for (std::uint32_t i = 0; i < dim_; ++i) {
      acc += static_cast<double>(p[i]) * static_cast<double>(p[i]);
    }
    row_sq_norms_[r] = acc;
  }
}

MemoryStats memory_stats(const MemorySet& m) {
  MemoryStats stats;
  stats.count = m.count();
  stats.items = m.catalog().size();
  stats.dim = m.dim();
  if (stats.items == 0) return stats;

  std::vector<std::uint32_t> freqs(stats.items);
  for (ItemId id = 0; id < stats.items; ++id) freqs[id] = m.catalog().freq(id);
  std::sort(freqs.begin(), freqs.end());
  stats.freq_min = freqs.front();
  stats.freq_median = freqs[freqs.size() / 2];
  stats.freq_max = freqs.back();
  return stats;
}

std::vector<MemoryRecord> reservoir_sample(RecordSource& records,
                                           std::size_t capacity,
                                           std::uint64_t seed) {
  if (capacity == 0) fail(Errc::invalid_argument, "capacity must be positive");
  Rng rng(seed);
  std::vector<MemoryRecord> reservoir;
  reservoir.reserve(capacity);
  std::uint64_t seen = 0;
  while (auto rec = records.next()) {
    ++seen;
    if (reservoir.size() < capacity) {
      reservoir.push_back(std::move(*rec));
    } else {
      const std::uint64_t slot = rng.below(seen);
      if (slot < capacity) reservoir[slot] = std::move(*rec);
    }
  }
  return reservoir;
}

std::vector<MemoryRecord> reservoir_sample(
    const std::vector<MemoryRecord>& records, std::size_t capacity,
    std::uint64_t seed) {
  VectorRecordSource source(records);
  return reservoir_sample(source, capacity, seed);
}

}  // namespace l2d
