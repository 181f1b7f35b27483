#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "l2d/decode.hpp"

namespace l2d {

// Embeddings of beam-generated items for one query, one row per beam.
struct BeamSet {
  std::uint32_t dim = 0;
  std::vector<float> embeddings;  // beam_count x dim, row-major

  std::uint32_t beam_count() const {
    return dim == 0 ? 0 : static_cast<std::uint32_t>(embeddings.size() / dim);
  }
  std::span<const float> beam(std::uint32_t b) const {
    return {embeddings.data() + static_cast<std::size_t>(b) * dim, dim};
  }
};

// Language-space grounding baseline: each beam ranks every candidate, the
// beam x candidate id matrix is read column by column (all rank-1 items in
// beam order, then all rank-2 items, ...) and the first K unique items are
// kept, in that order. Each entry is scored by the similarity between the
// item and the beam that contributed it. List order is column-major
// precedence, not score order; with a single beam the result coincides with
// decode_global.
RankedList ground_beams(const BeamSet& beams, const ItemRepTable& candidates,
                        std::uint32_t k, double epsilon = 1e-9,
                        std::uint64_t query_id = 0);

}  // namespace l2d
