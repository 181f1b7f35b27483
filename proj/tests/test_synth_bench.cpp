#include <doctest.h>

#include <cmath>
#include <vector>

#include "l2d/bench.hpp"
#include "l2d/error.hpp"
#include "l2d/metrics.hpp"
#include "l2d/synth.hpp"

using namespace l2d;

TEST_CASE("zero noise puts every row and query exactly on its centroid") {
  SynthSpec spec;
  spec.num_items = 15;
  spec.dim = 6;
  spec.samples_per_item = 4;
  spec.noise_sigma = 0.0;
  spec.query_count = 30;
  spec.seed = 5;
  const SynthData data = synth_dataset(spec);

  REQUIRE(data.memory.count() == 60);
  for (std::uint64_t r = 0; r < data.memory.count(); ++r) {
    const ItemId v = data.memory.item_of_row(r);
    for (std::uint32_t i = 0; i < spec.dim; ++i) {
      CHECK(data.memory.row(r)[i] == data.centroids[v * spec.dim + i]);
    }
  }

  const ItemRepTable table = global_representations(data.memory);
  const MetricsReport report = evaluate(data.samples, data.memory, table,
                                        DecodeConfig{}, {1}, 1);
  CHECK(report.per_k.at(1).recall == 1.0);
}

TEST_CASE("generation is reproducible per seed") {
  SynthSpec spec;
  spec.num_items = 8;
  spec.dim = 5;
  spec.samples_per_item = 3;
  spec.noise_sigma = 0.1;
  spec.query_count = 10;
  spec.seed = 77;

  const SynthData a = synth_dataset(spec);
  const SynthData b = synth_dataset(spec);
  CHECK(a.memory == b.memory);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].query.vector == b.samples[i].query.vector);
    CHECK(a.samples[i].truth == b.samples[i].truth);
  }

  spec.seed = 78;
  const SynthData c = synth_dataset(spec);
  CHECK(!(a.memory == c.memory));
}

TEST_CASE("queries cycle through every item") {
  SynthSpec spec;
  spec.num_items = 7;
  spec.dim = 3;
  spec.samples_per_item = 2;
  spec.query_count = 7;
  spec.seed = 3;
  const SynthData data = synth_dataset(spec);
  REQUIRE(data.samples.size() == 7);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(data.samples[i].truth ==
          data.memory.catalog().key_of(ItemId(i)));
  }
}

TEST_CASE("centroid separation concentrates near the uniform-cube value") {
  SynthSpec spec;
  spec.num_items = 60;
  spec.dim = 64;
  spec.samples_per_item = 1;
  spec.query_count = 0;
  spec.seed = 9;
  const SynthData data = synth_dataset(spec);
  const double sep =
      mean_centroid_separation(data.centroids, spec.num_items, spec.dim);
  // Mean pairwise distance of uniform points in [0,1)^d is about sqrt(d/6).
  CHECK(sep == doctest::Approx(std::sqrt(64.0 / 6.0)).epsilon(0.05));
}

TEST_CASE("the benchmark repeats runs and reports ordered percentiles") {
  SynthSpec spec;
  spec.num_items = 10;
  spec.dim = 16;
  spec.samples_per_item = 10;
  spec.noise_sigma = 0.05;
  spec.query_count = 25;
  spec.seed = 21;
  const SynthData data = synth_dataset(spec);
  const ItemRepTable table = global_representations(data.memory);

  std::vector<Query> queries;
  for (const EvalSample& s : data.samples) queries.push_back(s.query);

  DecodeConfig cfg;
  cfg.mode = DecodeMode::local;
  cfg.m = 30;
  cfg.k = 5;

  std::vector<DecodeOutcome> benched;
  const LatencyReport report =
      bench_decode(queries, data.memory, table, cfg, 4, 1, &benched);
  CHECK(report.threads == 1);
  CHECK(report.query_count == 25);
  CHECK(report.repetitions == 4);
  CHECK(report.batch_seconds > 0.0);
  CHECK(report.p95_ms >= report.p50_ms);
  CHECK(report.p50_ms > 0.0);
  CHECK(report.queries_per_second > 0.0);
  CHECK(report.scan_seconds > 0.0);

  // Timing instrumentation must not change what is decoded.
  const auto plain = batch_decode(queries, data.memory, table, cfg, 1);
  REQUIRE(benched.size() == plain.size());
  for (std::size_t i = 0; i < plain.size(); ++i) {
    REQUIRE(benched[i].ok);
    REQUIRE(benched[i].list.entries.size() == plain[i].list.entries.size());
    for (std::size_t j = 0; j < plain[i].list.entries.size(); ++j) {
      CHECK(benched[i].list.entries[j].item == plain[i].list.entries[j].item);
      CHECK(benched[i].list.entries[j].score ==
            plain[i].list.entries[j].score);
    }
  }
}

TEST_CASE("fewer than three repetitions is an error") {
  SynthSpec spec;
  spec.num_items = 3;
  spec.dim = 4;
  spec.samples_per_item = 2;
  spec.query_count = 2;
  spec.seed = 1;
  const SynthData data = synth_dataset(spec);
  const ItemRepTable table = global_representations(data.memory);
  std::vector<Query> queries;
  for (const EvalSample& s : data.samples) queries.push_back(s.query);

  for (std::uint32_t reps : {0u, 1u, 2u}) {
    try {
      bench_decode(queries, data.memory, table, DecodeConfig{}, reps, 1);
      FAIL("expected invalid_argument");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::invalid_argument);
    }
  }
  CHECK_THROWS_AS(bench_decode({}, data.memory, table, DecodeConfig{}, 3, 1),
                  Error);
}
