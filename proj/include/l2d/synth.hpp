#pragma once

#include <cstdint>
#include <vector>

#include "l2d/memory.hpp"
#include "l2d/metrics.hpp"

namespace l2d {

struct SynthSpec {
  std::uint32_t num_items = 100;
  std::uint32_t dim = 64;
  std::uint32_t samples_per_item = 20;
  // Per-coordinate gaussian noise added to the item centroid. 0 makes every
  // row equal to its centroid.
  double noise_sigma = 0.05;
  std::uint32_t query_count = 1000;
  std::uint64_t seed = 42;
};

struct SynthData {
  MemorySet memory;
  std::vector<EvalSample> samples;
  // Centroids in item order, row-major, kept for diagnostics.
  std::vector<float> centroids;
};

// Draws num_items centroids uniformly from [0,1)^dim, then emits
// samples_per_item memory rows and query_count eval samples around them.
// Item keys are "item_0000".. style; queries cycle through items in order so
// every item is covered when query_count >= num_items. Fully determined by
// spec.seed.
SynthData synth_dataset(const SynthSpec& spec);

// Mean pairwise L2 distance between centroids (row-major, num x dim).
// Used to express noise_sigma as a fraction of cluster separation.
double mean_centroid_separation(const std::vector<float>& centroids,
                                std::uint32_t num, std::uint32_t dim);

}  // namespace l2d
