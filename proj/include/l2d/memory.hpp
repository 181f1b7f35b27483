#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "l2d/catalog.hpp"

namespace l2d {

// One ingested (hidden state, ground-truth item) pair.
struct MemoryRecord {
  std::uint64_t sample_id = 0;
  std::string item;
  std::vector<float> vector;
};

// Pull-style record producer so builds and reservoir sampling stay single
// pass over arbitrarily large inputs.
class RecordSource {
 public:
  virtual ~RecordSource() = default;
  virtual std::optional<MemoryRecord> next() = 0;
};

// Adapts an in-memory record list to the streaming interface.
class VectorRecordSource final : public RecordSource {
 public:
  explicit VectorRecordSource(std::vector<MemoryRecord> records)
      : records_(std::move(records)) {}

  std::optional<MemoryRecord> next() override {
    if (pos_ >= records_.size()) return std::nullopt;
    return records_[pos_++];
  }

 private:
  std::vector<MemoryRecord> records_;
  std::size_t pos_ = 0;
};

// Immutable store of N hidden-state rows plus the per-item inverted index.
// Built once, then read-only; safe to share across threads.
class MemorySet {
 public:
  MemorySet() = default;

  // Consumes the stream and builds the set. Row order is ingestion order.
  // Rejects the whole build on a dimension mismatch, a non-finite component
  // or a duplicate sample_id, naming the offending sample.
  static MemorySet build(RecordSource& records, std::uint32_t dim);
  static MemorySet build(const std::vector<MemoryRecord>& records,
                         std::uint32_t dim);

  // Assembles a set from already-validated parts (persistence, synthesis).
  static MemorySet from_parts(std::uint32_t dim, std::vector<float> matrix,
                              std::vector<ItemId> item_of_row,
                              ItemCatalog catalog);

  std::uint32_t dim() const { return dim_; }
  std::uint64_t count() const { return item_of_row_.size(); }

  std::span<const float> row(std::uint64_t r) const {
    return {matrix_.data() + r * dim_, dim_};
  }
  const float* row_ptr(std::uint64_t r) const {
    return matrix_.data() + r * dim_;
  }
  ItemId item_of_row(std::uint64_t r) const { return item_of_row_[r]; }
  const std::vector<ItemId>& items_of_rows() const { return item_of_row_; }

  // Row indices holding item v, ascending.
  const std::vector<std::uint32_t>& rows_of_item(ItemId v) const {
    return item_index_[v];
  }

  const ItemCatalog& catalog() const { return catalog_; }
  const std::vector<float>& matrix() const { return matrix_; }

  // Cached squared L2 norm of each row, used by the expanded-form scan.
  double row_sq_norm(std::uint64_t r) const { return row_sq_norms_[r]; }

  bool operator==(const MemorySet& other) const {
    return dim_ == other.dim_ && matrix_ == other.matrix_ &&
           item_of_row_ == other.item_of_row_ && catalog_ == other.catalog_;
  }

 private:
  std::uint32_t dim_ = 0;
  std::vector<float> matrix_;  // count x dim, row-major
  std::vector<ItemId> item_of_row_;
  std::vector<std::vector<std::uint32_t>> item_index_;
  ItemCatalog catalog_;
  std::vector<double> row_sq_norms_;

  void finalize_derived();
};

struct MemoryStats {
  std::uint64_t count = 0;
  std::uint32_t items = 0;
  std::uint32_t dim = 0;
  std::uint32_t freq_min = 0;
  std::uint32_t freq_median = 0;
  std::uint32_t freq_max = 0;
};

MemoryStats memory_stats(const MemorySet& m);

// Uniform sample of at most `capacity` records from the stream (Algorithm R).
// Every element of an N-record stream is kept with probability capacity/N;
// the result is deterministic for a given seed.
std::vector<MemoryRecord> reservoir_sample(RecordSource& records,
                                           std::size_t capacity,
                                           std::uint64_t seed);
std::vector<MemoryRecord> reservoir_sample(
    const std::vector<MemoryRecord>& records, std::size_t capacity,
    std::uint64_t seed);

}  // namespace l2d
