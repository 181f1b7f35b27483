#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "l2d/decode.hpp"

namespace l2d {

// One evaluation case: a query plus its single ground-truth next item.
struct EvalSample {
  Query query;
  std::string truth;
};

// Hit indicator: 1 if truth is within the first K entries, else 0.
int recall_at_k(const RankedList& ranked, ItemId truth, std::uint32_t k);

// 1 / log2(rank + 1) at the 1-based rank of truth if rank <= K, else 0.
// With a single ground truth the ideal DCG is 1, so this is already
// normalized.
double ndcg_at_k(const RankedList& ranked, ItemId truth, std::uint32_t k);

struct KMetrics {
  double recall = 0.0;
  double ndcg = 0.0;
};

struct MetricsReport {
  std::string cohort = "overall";
  std::size_t sample_count = 0;
  // Samples whose truth key is not in the catalog; counted as misses above,
  // tallied here so they are visible.
  std::size_t missing_truth = 0;
  std::map<std::uint32_t, KMetrics> per_k;
};

// Full-ranking evaluation: decodes each sample once at K = max(ks) and
// averages recall/ndcg per cutoff. cfg.k is ignored in favour of max(ks).
// Tallies are integers plus one fixed-order float sum, so the report is
// identical for any thread count.
MetricsReport evaluate(const std::vector<EvalSample>& samples,
                       const MemorySet& m, const ItemRepTable& global_table,
                       const DecodeConfig& cfg,
                       const std::vector<std::uint32_t>& ks,
                       unsigned threads = 1,
                       const std::string& cohort = "overall");

// Splits samples by training-set frequency of the truth item: sparse iff
// freq <= threshold (truth absent from the catalog counts as sparse).
std::pair<std::vector<EvalSample>, std::vector<EvalSample>> cohort_split(
    const std::vector<EvalSample>& samples, const ItemCatalog& catalog,
    std::uint32_t threshold);

struct SweepRow {
  std::uint32_t m = 0;
  MetricsReport report;
};

// One local-mode evaluate run per M, in the given order, sharing base_cfg
// (mode is forced to local and m overridden per row). A row with m >= N
// equals the global-mode report exactly.
std::vector<SweepRow> sweep_m(const std::vector<EvalSample>& samples,
                              const MemorySet& m,
                              const ItemRepTable& global_table,
                              const DecodeConfig& base_cfg,
                              const std::vector<std::uint32_t>& ms,
                              const std::vector<std::uint32_t>& ks,
                              unsigned threads = 1);

}  // namespace l2d
