#include "l2d/synth.hpp"

#include <cstdio>

#include "l2d/decode.hpp"
#include "l2d/error.hpp"
#include "l2d/rng.hpp"

namespace l2d {

namespace {

std::string item_key(std::uint32_t index) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "item_%06u", index);
  return buf;
}

// Centroid plus per-coordinate gaussian noise. A zero sigma adds exact
// zeros, so the emitted vector equals the centroid bit for bit.
std::vector<float> jitter(const float* centroid, std::uint32_t dim,
                          double sigma, Rng& rng) {
  std::vector<float> v(dim);
  for (std::uint32_t i = 0; i < dim; ++i) {
    v[i] = float(double(centroid[i]) + sigma * rng.gaussian());
  }
  return v;
}

}  // namespace

SynthData synth_dataset(const SynthSpec& spec) {
  if (spec.num_items == 0 || spec.dim == 0 || spec.samples_per_item == 0) {
    fail(Errc::invalid_argument,
         "items, dim and samples per item must be positive");
  }
  if (spec.noise_sigma < 0.0) {
    fail(Errc::invalid_argument, "noise sigma must be non-negative");
  }

  Rng rng(spec.seed);

  SynthData data;
  data.centroids.resize(std::size_t(spec.num_items) * spec.dim);
  for (float& c : data.centroids) c = float(rng.uniform01());

  std::vector<MemoryRecord> records;
  records.reserve(std::size_t(spec.num_items) * spec.samples_per_item);
  std::uint64_t next_id = 0;
  for (std::uint32_t v = 0; v < spec.num_items; ++v) {
    const float* centroid = data.centroids.data() + std::size_t(v) * spec.dim;
    for (std::uint32_t s = 0; s < spec.samples_per_item; ++s) {
      records.push_back({next_id++, item_key(v),
                         jitter(centroid, spec.dim, spec.noise_sigma, rng)});
    }
  }
  data.memory = MemorySet::build(records, spec.dim);

  data.samples.reserve(spec.query_count);
  for (std::uint32_t qi = 0; qi < spec.query_count; ++qi) {
    const std::uint32_t v = qi % spec.num_items;
    const float* centroid = data.centroids.data() + std::size_t(v) * spec.dim;
    EvalSample sample;
    sample.query.query_id = qi;
    sample.query.vector = jitter(centroid, spec.dim, spec.noise_sigma, rng);
    sample.truth = item_key(v);
    data.samples.push_back(std::move(sample));
  }
  return data;
}

double mean_centroid_separation(const std::vector<float>& centroids,
                                std::uint32_t num, std::uint32_t dim) {
  if (num < 2) return 0.0;
  double total = 0.0;
  std::uint64_t pairs = 0;
  for (std::uint32_t i = 0; i < num; ++i) {
    for (std::uint32_t j = i + 1; j < num; ++j) {
      total += l2_distance({centroids.data() + std::size_t(i) * dim, dim},
                           {centroids.data() + std::size_t(j) * dim, dim});
      ++pairs;
    }
  }
  return total / double(pairs);
}

}  // namespace l2d
