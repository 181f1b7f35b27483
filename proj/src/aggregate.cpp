#include "l2d/aggregate.hpp"

#include <algorithm>
#include <utility>

#include "l2d/error.hpp"

namespace l2d {

namespace {

// Mean of the given rows, accumulated in 64-bit, emitted as f32. Rows must
// already be in the caller's canonical order; the addition order is what
// makes global and whole-memory local tables bit-identical.
void mean_of_rows(const MemorySet& m, const std::vector<std::uint32_t>& rows,
                  float* out) {
  const std::uint32_t dim = m.dim();
  std::vector<double> acc(dim, 0.0);
  for (std::uint32_t r : rows) {
    const float* p = m.row_ptr(r);
    for (std::uint32_t i = 0; i < dim; ++i) acc[i] += double(p[i]);
  }
  const double inv = 1.0 / double(rows.size());
  for (std::uint32_t i = 0; i < dim; ++i) out[i] = float(acc[i] * inv);
}

}  // namespace

ItemRepTable ItemRepTable::from_parts(std::uint32_t dim,
                                      std::vector<ItemId> items,
                                      std::vector<float> reps,
                                      std::vector<std::uint32_t> support) {
  if (reps.size() != items.size() * std::size_t(dim) ||
      support.size() != items.size()) {
    fail(Errc::invalid_argument, "representation table parts disagree");
  }
  ItemRepTable t;
  t.dim_ = dim;
  t.items_ = std::move(items);
  t.reps_ = std::move(reps);
  t.support_ = std::move(support);
  t.rep_sq_norms_.resize(t.items_.size());
  for (std::size_t s = 0; s < t.items_.size(); ++s) {
    const float* p = t.reps_.data() + s * dim;
    double acc = 0.0;
    for (std::uint32_t i = 0; i < dim; ++i) acc += double(p[i]) * double(p[i]);
    t.rep_sq_norms_[s] = acc;
    t.slot_of_item_.emplace(t.items_[s], s);
  }
  return t;
}

ItemRepTable global_representations(const MemorySet& m) {
  if (m.count() == 0) fail(Errc::empty_memory, "empty memory");

  const std::uint32_t items = m.catalog().size();
  std::vector<ItemId> ids(items);
  std::vector<float> reps(std::size_t(items) * m.dim());
  std::vector<std::uint32_t> support(items);
  for (ItemId id = 0; id < items; ++id) {
    ids[id] = id;
    const auto& rows = m.rows_of_item(id);
    support[id] = std::uint32_t(rows.size());
    mean_of_rows(m, rows, reps.data() + std::size_t(id) * m.dim());
  }
  return ItemRepTable::from_parts(m.dim(), std::move(ids), std::move(reps),
                                  std::move(support));
}

ItemRepTable local_representations(const MemorySet& m,
                                   const NeighborSet& neighbors) {
  // Group neighbor rows per item, ascending rows within each group so the
  // accumulation order matches the global pass over the same rows.
  std::unordered_map<ItemId, std::vector<std::uint32_t>> groups;
  for (const Neighbor& n : neighbors) {
    groups[m.item_of_row(n.row)].push_back(n.row);
  }
  std::vector<ItemId> ids;
  ids.reserve(groups.size());
  for (const auto& [id, rows] : groups) ids.push_back(id);
  std::sort(ids.begin(), ids.end());

  std::vector<float> reps(ids.size() * std::size_t(m.dim()));
  std::vector<std::uint32_t> support(ids.size());
  for (std::size_t s = 0; s < ids.size(); ++s) {
    std::vector<std::uint32_t>& rows = groups[ids[s]];
    std::sort(rows.begin(), rows.end());
    support[s] = std::uint32_t(rows.size());
    mean_of_rows(m, rows, reps.data() + s * m.dim());
  }
  return ItemRepTable::from_parts(m.dim(), std::move(ids), std::move(reps),
                                  std::move(support));
}

void export_representations(const ItemRepTable& table,
                            const ItemCatalog& catalog,
                            const std::string& path, StorageDtype dtype) {
  ItemCatalog out_catalog;
  std::vector<ItemId> item_of_row(table.size());
  for (std::size_t s = 0; s < table.size(); ++s) {
    item_of_row[s] = out_catalog.add_occurrence(catalog.key_of(table.item_at(s)));
  }
  std::vector<float> matrix(table.size() * std::size_t(table.dim()));
  for (std::size_t s = 0; s < table.size(); ++s) {
    const float* p = table.rep_ptr(s);
    std::copy(p, p + table.dim(), matrix.data() + s * table.dim());
  }
  const MemorySet out = MemorySet::from_parts(
      table.dim(), std::move(matrix), std::move(item_of_row),
      std::move(out_catalog));
  save_memory(out, path, dtype);
}

}  // namespace l2d
