#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "l2d/decode.hpp"
#include "l2d/ground.hpp"
#include "l2d/memory.hpp"
#include "l2d/metrics.hpp"

namespace l2d {

// Streams memory records out of JSON-lines text, one object per line:
//   {"sample_id": 7, "item": "sku-123", "vector": [0.5, ...]}
// Blank lines are skipped. Malformed lines raise Errc::bad_record with the
// 1-based line number.
class JsonlRecordSource final : public RecordSource {
 public:
  explicit JsonlRecordSource(std::istream& in);

  std::optional<MemoryRecord> next() override;

 private:
  std::istream* in_;
  std::size_t line_no_ = 0;
};

// {"query_id": 3, "vector": [...]} per line.
std::vector<Query> read_queries(std::istream& in);

// {"query_id": 3, "vector": [...], "truth": "sku-123"} per line.
std::vector<EvalSample> read_eval_samples(std::istream& in);

// {"query_id": 3, "beams": [[...], [...]]} per line; every beam vector in a
// file must share one dimension.
struct BeamRecord {
  std::uint64_t query_id = 0;
  BeamSet beams;
};
std::vector<BeamRecord> read_beams(std::istream& in);

// One memory record as a JSON line (no trailing newline).
std::string format_record(const MemoryRecord& rec);

// One ranked result as a JSON line, e.g.
//   {"query_id":3,"mode":"local","k":2,"items":[{"item":"a","score":1.25}, ...]}
// Scores are printed with %.9g so equal doubles always render identically.
// `mode` is the caller's tag ("global", "local", "grounding"); extras such as
// "backfill":"global" are appended verbatim when non-empty.
std::string format_ranked_line(const RankedList& ranked,
                               const ItemCatalog& catalog,
                               const std::string& mode,
                               const std::string& extras = "");

// Shortest float round-trip text for vectors, %.9g; shared by format_record
// and the synth writer so files diff cleanly.
std::string format_vector(const std::vector<float>& v);
std::string format_double(double v);

// JSON string escaping for item keys.
std::string json_escape(const std::string& s);

}  // namespace l2d
