#include "l2d/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "l2d/error.hpp"
#include "l2d/parallel.hpp"

namespace l2d {

namespace {

// 1-based rank of truth within the first k entries, 0 when absent.
std::uint32_t rank_within(const RankedList& ranked, ItemId truth,
                          std::uint32_t k) {
  const std::size_t limit = std::min<std::size_t>(k, ranked.entries.size());
  for (std::size_t i = 0; i < limit; ++i) {
    if (ranked.entries[i].item == truth) return std::uint32_t(i) + 1;
  }
  return 0;
}

}  // namespace

int recall_at_k(const RankedList& ranked, ItemId truth, std::uint32_t k) {
  return rank_within(ranked, truth, k) != 0 ? 1 : 0;
}

double ndcg_at_k(const RankedList& ranked, ItemId truth, std::uint32_t k) {
  const std::uint32_t rank = rank_within(ranked, truth, k);
  if (rank == 0) return 0.0;
  return 1.0 / std::log2(double(rank) + 1.0);
}

MetricsReport evaluate(const std::vector<EvalSample>& samples,
                       const MemorySet& m, const ItemRepTable& global_table,
                       const DecodeConfig& cfg,
                       const std::vector<std::uint32_t>& ks, unsigned threads,
                       const std::string& cohort) {
  if (ks.empty()) fail(Errc::invalid_argument, "no cutoffs given");

  MetricsReport report;
  report.cohort = cohort;
  report.sample_count = samples.size();
  for (std::uint32_t k : ks) report.per_k[k] = KMetrics{};
  if (samples.empty()) return report;

  DecodeConfig decode_cfg = cfg;
  decode_cfg.k = *std::max_element(ks.begin(), ks.end());

  std::vector<Query> queries(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    queries[i] = samples[i].query;
  }
  const auto outcomes =
      batch_decode(queries, m, global_table, decode_cfg, threads);

  // Ranks are gathered per sample first and reduced in index order, so the
  // report does not depend on the thread count.
  const ItemCatalog& catalog = m.catalog();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!outcomes[i].ok) {
      fail(Errc::bad_record, "query_id " +
                                 std::to_string(samples[i].query.query_id) +
                                 ": " + outcomes[i].error);
    }
    const auto truth = catalog.find(samples[i].truth);
    if (!truth) {
      // An unseen truth item cannot be ranked; it stays a miss at every k.
      ++report.missing_truth;
      continue;
    }
    const std::uint32_t rank =
        rank_within(outcomes[i].list, *truth, decode_cfg.k);
    if (rank == 0) continue;
    for (std::uint32_t k : ks) {
      if (rank <= k) {
        KMetrics& km = report.per_k[k];
        km.recall += 1.0;
        km.ndcg += 1.0 / std::log2(double(rank) + 1.0);
      }
    }
  }

  const double inv = 1.0 / double(samples.size());
  for (auto& [k, km] : report.per_k) {
    km.recall *= inv;
    km.ndcg *= inv;
  }
  return report;
}

std::pair<std::vector<EvalSample>, std::vector<EvalSample>> cohort_split(
    const std::vector<EvalSample>& samples, const ItemCatalog& catalog,
    std::uint32_t threshold) {
  std::vector<EvalSample> sparse;
  std::vector<EvalSample> dense;
  for (const EvalSample& s : samples) {
    const auto id = catalog.find(s.truth);
    const std::uint32_t freq = id ? catalog.freq(*id) : 0;
    (freq <= threshold ? sparse : dense).push_back(s);
  }
  return {std::move(sparse), std::move(dense)};
}

std::vector<SweepRow> sweep_m(const std::vector<EvalSample>& samples,
                              const MemorySet& m,
                              const ItemRepTable& global_table,
                              const DecodeConfig& base_cfg,
                              const std::vector<std::uint32_t>& ms,
                              const std::vector<std::uint32_t>& ks,
                              unsigned threads) {
  std::vector<SweepRow> rows;
  rows.reserve(ms.size());
  for (std::uint32_t neighborhood : ms) {
    DecodeConfig cfg = base_cfg;
    cfg.mode = DecodeMode::local;
    cfg.m = neighborhood;
    rows.push_back({neighborhood, evaluate(samples, m, global_table, cfg, ks,
                                           threads)});
  }
  return rows;
}

}  // namespace l2d
