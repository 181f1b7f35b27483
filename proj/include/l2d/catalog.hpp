#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace l2d {

using ItemId = std::uint32_t;

// Bidirectional map between opaque external item keys and dense 0-based ids,
// with a per-item occurrence count. Ids are assigned in order of first
// appearance, so a catalog built from the same stream is always identical.
class ItemCatalog {
 public:
  // Registers one occurrence of `key`, minting a new id on first sight.
  ItemId add_occurrence(std::string_view key);

  std::optional<ItemId> find(std::string_view key) const {
    auto it = id_of_.find(std::string(key));
    return it == id_of_.end() ? std::nullopt
                              : std::optional<ItemId>(it->second);
  }

  const std::string& key_of(ItemId id) const { return keys_[id]; }
  std::uint32_t freq(ItemId id) const { return freq_[id]; }
  std::uint32_t size() const { return static_cast<std::uint32_t>(keys_.size()); }

  // Sum of all frequencies; equals the number of registered occurrences.
  std::uint64_t total() const { return total_; }

  bool operator==(const ItemCatalog& other) const {
    return keys_ == other.keys_ && freq_ == other.freq_;
  }

 private:
  std::vector<std::string> keys_;
  std::vector<std::uint32_t> freq_;
  std::unordered_map<std::string, ItemId> id_of_;
  std::uint64_t total_ = 0;
};

}  // namespace l2d
