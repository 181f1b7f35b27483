#include "l2d/ground.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "l2d/error.hpp"

namespace l2d {

RankedList ground_beams(const BeamSet& beams, const ItemRepTable& candidates,
                        std::uint32_t k, double epsilon,
                        std::uint64_t query_id) {
  if (beams.beam_count() == 0) {
    fail(Errc::invalid_argument, "grounding needs at least one beam");
  }
  if (beams.dim != candidates.dim()) {
    fail(Errc::dim_mismatch, "beam dimension does not match candidates");
  }

  // Every beam ranks the full candidate set by ascending (distance, item).
  const std::uint32_t beam_count = beams.beam_count();
  const std::size_t slots = candidates.size();
  std::vector<std::vector<ScoredItem>> rankings(beam_count);
  for (std::uint32_t b = 0; b < beam_count; ++b) {
    const Query q{0, {beams.beam(b).begin(), beams.beam(b).end()}};
    const RankedList full =
        decode_global(q, candidates, std::uint32_t(slots), epsilon);
    rankings[b] = full.entries;
  }

  // Read the beam x rank matrix column by column: the rank-1 item of every
  // beam, then every rank-2 item, and so on. The first K distinct items win,
  // each scored by the beam entry that introduced it.
  RankedList out;
  out.query_id = query_id;
  std::vector<char> taken(slots, 0);
  for (std::size_t col = 0; col < slots && out.entries.size() < k; ++col) {
    for (std::uint32_t b = 0; b < beam_count && out.entries.size() < k; ++b) {
      const ScoredItem& entry = rankings[b][col];
      const std::size_t slot = *candidates.slot_of(entry.item);
      if (taken[slot]) continue;
      taken[slot] = 1;
      out.entries.push_back(entry);
    }
  }
  return out;
}

}  // namespace l2d
