#include <doctest.h>

#include <cmath>
#include <vector>

#include "l2d/error.hpp"
#include "l2d/metrics.hpp"
#include "test_util.hpp"

using namespace l2d;
using testutil::rec;

namespace {

RankedList list_of(std::vector<ItemId> items) {
  RankedList out;
  double score = 100.0;
  for (ItemId id : items) out.entries.push_back({id, score -= 1.0});
  return out;
}

// A memory whose items sit far apart on a line, one row per item, plus
// samples whose queries land exactly on chosen items.
struct LineWorld {
  MemorySet memory;
  std::vector<EvalSample> samples;
};

LineWorld line_world() {
  std::vector<MemoryRecord> records;
  for (std::uint32_t i = 0; i < 6; ++i) {
    records.push_back(rec(i, "n" + std::to_string(i), {float(10 * i), 0.f}));
  }
  LineWorld w{MemorySet::build(records, 2), {}};
  for (std::uint32_t i = 0; i < 6; ++i) {
    EvalSample s;
    s.query.query_id = i;
    s.query.vector = {float(10 * i), 0.f};
    s.truth = "n" + std::to_string(i);
    w.samples.push_back(s);
  }
  return w;
}

}  // namespace

TEST_CASE("recall is a hit indicator over the first k entries") {
  const RankedList ranked = list_of({4, 7, 2, 9});
  CHECK(recall_at_k(ranked, 4, 1) == 1);
  CHECK(recall_at_k(ranked, 7, 1) == 0);
  CHECK(recall_at_k(ranked, 7, 2) == 1);
  CHECK(recall_at_k(ranked, 9, 3) == 0);
  CHECK(recall_at_k(ranked, 9, 4) == 1);
  CHECK(recall_at_k(ranked, 1, 100) == 0);
}

TEST_CASE("the gain discounts logarithmically with the hit rank") {
  const RankedList ranked = list_of({4, 7, 2, 9});
  CHECK(ndcg_at_k(ranked, 4, 4) == 1.0);
  CHECK(ndcg_at_k(ranked, 7, 4) == doctest::Approx(0.63093).epsilon(1e-4));
  CHECK(ndcg_at_k(ranked, 2, 4) == doctest::Approx(0.5));
  CHECK(ndcg_at_k(ranked, 9, 4) ==
        doctest::Approx(1.0 / std::log2(5.0)));
  CHECK(ndcg_at_k(ranked, 9, 3) == 0.0);
  CHECK(ndcg_at_k(ranked, 1, 4) == 0.0);
}

TEST_CASE("closed-form gains for every rank up to twenty") {
  std::vector<ItemId> items;
  for (ItemId i = 0; i < 20; ++i) items.push_back(i);
  const RankedList ranked = list_of(items);
  for (std::uint32_t rank = 1; rank <= 20; ++rank) {
    const double want = 1.0 / std::log2(double(rank) + 1.0);
    CHECK(ndcg_at_k(ranked, rank - 1, 20) == doctest::Approx(want));
    CHECK(recall_at_k(ranked, rank - 1, 20) == 1);
  }
}

TEST_CASE("evaluation averages per-sample metrics at each cutoff") {
  const LineWorld w = line_world();
  const ItemRepTable table = global_representations(w.memory);

  // Push one query off its item so the truth lands second.
  auto samples = w.samples;
  samples[0].query.vector = {6.f, 0.f};
  samples[0].truth = "n0";

  DecodeConfig cfg;
  const MetricsReport report =
      evaluate(samples, w.memory, table, cfg, {1, 2}, 1);
  CHECK(report.sample_count == 6);
  CHECK(report.missing_truth == 0);

  // Query 0 at x=6: distances are 6 to n0 and 4 to n1, so its truth sits at
  // rank 2; the other five hit at rank 1.
  CHECK(report.per_k.at(1).recall == doctest::Approx(5.0 / 6.0));
  CHECK(report.per_k.at(2).recall == 1.0);
  const double want_ndcg2 = (5.0 + 1.0 / std::log2(3.0)) / 6.0;
  CHECK(report.per_k.at(2).ndcg == doctest::Approx(want_ndcg2));
}

TEST_CASE("a truth item missing from the catalog counts as a tallied miss") {
  const LineWorld w = line_world();
  const ItemRepTable table = global_representations(w.memory);
  auto samples = w.samples;
  samples[3].truth = "never-seen";

  const MetricsReport report =
      evaluate(samples, w.memory, table, DecodeConfig{}, {1, 6}, 1);
  CHECK(report.missing_truth == 1);
  CHECK(report.per_k.at(1).recall == doctest::Approx(5.0 / 6.0));
  CHECK(report.per_k.at(6).recall == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("gains never exceed recall and both grow with the cutoff") {
  const MemorySet m =
      MemorySet::build(testutil::random_records(200, 5, 15, 71), 5);
  const ItemRepTable table = global_representations(m);
  Rng rng(72);
  std::vector<EvalSample> samples;
  for (int i = 0; i < 50; ++i) {
    EvalSample s;
    s.query.query_id = std::uint64_t(i);
    s.query.vector = testutil::random_vector(5, rng);
    s.truth = "item-" + std::to_string(rng.below(15));
    samples.push_back(s);
  }

  const MetricsReport report =
      evaluate(samples, m, table, DecodeConfig{}, {1, 3, 5, 10, 15}, 1);
  double prev_recall = -1.0;
  double prev_ndcg = -1.0;
  for (const auto& [k, km] : report.per_k) {
    CHECK(km.ndcg <= km.recall + 1e-12);
    CHECK(km.recall >= prev_recall);
    CHECK(km.ndcg >= prev_ndcg);
    prev_recall = km.recall;
    prev_ndcg = km.ndcg;
  }
  CHECK(report.per_k.at(15).recall == 1.0);
}

TEST_CASE("the cohort split is exhaustive with absent truths in sparse") {
  std::vector<MemoryRecord> records;
  std::uint64_t id = 0;
  for (int i = 0; i < 7; ++i) records.push_back(rec(id++, "rare", {0.f}));
  for (int i = 0; i < 8; ++i) records.push_back(rec(id++, "common", {1.f}));
  const MemorySet m = MemorySet::build(records, 1);

  std::vector<EvalSample> samples(5);
  samples[0].truth = "rare";
  samples[1].truth = "common";
  samples[2].truth = "rare";
  samples[3].truth = "absent";
  samples[4].truth = "common";

  const auto [sparse, dense] = cohort_split(samples, m.catalog(), 7);
  CHECK(sparse.size() + dense.size() == samples.size());
  // rare has frequency 7 == threshold (sparse), common 8 (dense),
  // absent is always sparse.
  CHECK(sparse.size() == 3);
  CHECK(dense.size() == 2);

  const auto [none_sparse, all_dense] = cohort_split(samples, m.catalog(), 0);
  CHECK(none_sparse.size() == 1);  // only the absent truth
  CHECK(all_dense.size() == 4);
}

TEST_CASE("a sweep row with a whole-memory neighborhood equals global exactly") {
  const MemorySet m =
      MemorySet::build(testutil::random_records(150, 6, 10, 81), 6);
  const ItemRepTable table = global_representations(m);
  Rng rng(82);
  std::vector<EvalSample> samples;
  for (int i = 0; i < 40; ++i) {
    EvalSample s;
    s.query.query_id = std::uint64_t(i);
    s.query.vector = testutil::random_vector(6, rng);
    s.truth = "item-" + std::to_string(rng.below(10));
    samples.push_back(s);
  }

  const std::vector<std::uint32_t> ks = {1, 5, 10};
  const auto rows = sweep_m(samples, m, table, DecodeConfig{},
                            {4, std::uint32_t(m.count())}, ks, 1);
  REQUIRE(rows.size() == 2);

  DecodeConfig global_cfg;
  global_cfg.mode = DecodeMode::global;
  const MetricsReport global_report =
      evaluate(samples, m, table, global_cfg, ks, 1);
  for (std::uint32_t k : ks) {
    CHECK(rows[1].report.per_k.at(k).recall ==
          global_report.per_k.at(k).recall);
    CHECK(rows[1].report.per_k.at(k).ndcg == global_report.per_k.at(k).ndcg);
  }

  // Re-running a single M reproduces its sweep row exactly.
  DecodeConfig local_cfg;
  local_cfg.mode = DecodeMode::local;
  local_cfg.m = 4;
  const MetricsReport rerun = evaluate(samples, m, table, local_cfg, ks, 1);
  for (std::uint32_t k : ks) {
    CHECK(rows[0].report.per_k.at(k).recall == rerun.per_k.at(k).recall);
    CHECK(rows[0].report.per_k.at(k).ndcg == rerun.per_k.at(k).ndcg);
  }
}

TEST_CASE("evaluation requires at least one cutoff") {
  const LineWorld w = line_world();
  const ItemRepTable table = global_representations(w.memory);
  CHECK_THROWS_AS(
      (void)evaluate(w.samples, w.memory, table, DecodeConfig{}, {}, 1),
      Error);
}
