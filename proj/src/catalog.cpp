#include "l2d/catalog.hpp"

namespace l2d {

ItemId ItemCatalog::add_occurrence(std::string_view key) {
  std::string owned(key);
  auto [it, inserted] =
      id_of_.try_emplace(std::move(owned), static_cast<ItemId>(keys_.size()));
  if (inserted) {
    keys_.push_back(it->first);
    freq_.push_back(0);
  }
  ++freq_[it->second];
  ++total_;
  return it->second;
}

}  // namespace l2d
