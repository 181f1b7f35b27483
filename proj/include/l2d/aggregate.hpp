#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "l2d/memory.hpp"
#include "l2d/memory_io.hpp"

namespace l2d {

struct Neighbor {
  std::uint32_t row = 0;
  double distance = 0.0;
};

// Rows nearest to a query, ascending by (distance, row).
using NeighborSet = std::vector<Neighbor>;

// Per-item aggregated vectors. Entries are sorted by item id; items with no
// supporting rows are absent rather than zero. Means are accumulated in
// 64-bit and stored as f32, so tables built from the same rows are identical
// regardless of memory row order.
class ItemRepTable {
 public:
  ItemRepTable() = default;

  static ItemRepTable from_parts(std::uint32_t dim, std::vector<ItemId> items,
                                 std::vector<float> reps,
                                 std::vector<std::uint32_t> support);

  std::uint32_t dim() const { return dim_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  ItemId item_at(std::size_t slot) const { return items_[slot]; }
  std::span<const float> rep_at(std::size_t slot) const {
    return {reps_.data() + slot * dim_, dim_};
  }
  const float* rep_ptr(std::size_t slot) const {
    return reps_.data() + slot * dim_;
  }
  std::uint32_t support_at(std::size_t slot) const { return support_[slot]; }
  double rep_sq_norm(std::size_t slot) const { return rep_sq_norms_[slot]; }

  std::optional<std::size_t> slot_of(ItemId item) const {
    auto it = slot_of_item_.find(item);
    return it == slot_of_item_.end() ? std::nullopt
                                     : std::optional<std::size_t>(it->second);
  }
  bool contains(ItemId item) const { return slot_of_item_.count(item) != 0; }

 private:
  std::uint32_t dim_ = 0;
  std::vector<ItemId> items_;          // ascending
  std::vector<float> reps_;            // size() x dim, row-major
  std::vector<std::uint32_t> support_;
  std::vector<double> rep_sq_norms_;
  std::unordered_map<ItemId, std::size_t> slot_of_item_;
};

// Mean of every hidden state per item, over the whole memory. Errors on an
// empty memory. Covers exactly the catalog.
ItemRepTable global_representations(const MemorySet& m);

// Mean per item over the given neighbor rows only. Covers exactly the items
// present among the neighbors; empty neighbors give an empty table. With
// neighbors = all rows the result equals global_representations bit for bit.
ItemRepTable local_representations(const MemorySet& m,
                                   const NeighborSet& neighbors);

// Writes the table as a memory container whose rows are the representation
// vectors, one row per item in id order. Readable with load_memory.
void export_representations(const ItemRepTable& table,
                            const ItemCatalog& catalog,
                            const std::string& path,
                            StorageDtype dtype = StorageDtype::f32);

}  // namespace l2d
