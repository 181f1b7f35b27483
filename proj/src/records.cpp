#include "l2d/records.hpp"

#include <cstdio>
#include <istream>
#include <utility>

#include <json.hpp>

#include "l2d/error.hpp"

namespace l2d {

namespace {

using nlohmann::json;

[[noreturn]] void bad_line(std::size_t line_no, const std::string& why) {
  fail(Errc::bad_record, "line " + std::to_string(line_no) + ": " + why);
}

json parse_line(const std::string& line, std::size_t line_no) {
  json value = json::parse(line, nullptr, false);
  if (value.is_discarded() || !value.is_object()) {
    bad_line(line_no, "not a JSON object");
  }
  return value;
}

std::uint64_t take_id(const json& obj, const char* field,
                      std::size_t line_no) {
  const auto it = obj.find(field);
  if (it == obj.end() || !it->is_number_integer() ||
      (it->is_number_integer() && !it->is_number_unsigned() &&
       it->get<std::int64_t>() < 0)) {
    bad_line(line_no, std::string(field) + " must be a non-negative integer");
  }
  return it->get<std::uint64_t>();
}

std::string take_string(const json& obj, const char* field,
                        std::size_t line_no) {
  const auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    bad_line(line_no, std::string(field) + " must be a string");
  }
  return it->get<std::string>();
}

std::vector<float> take_vector(const json& value, const char* what,
                               std::size_t line_no) {
  if (!value.is_array() || value.empty()) {
    bad_line(line_no, std::string(what) + " must be a non-empty array");
  }
  std::vector<float> out;
  out.reserve(value.size());
  for (const json& x : value) {
    if (!x.is_number()) {
      bad_line(line_no, std::string(what) + " has a non-numeric component");
    }
    out.push_back(float(x.get<double>()));
  }
  return out;
}

// Reads the next non-blank line; false at end of stream.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

}  // namespace

JsonlRecordSource::JsonlRecordSource(std::istream& in) : in_(&in) {}

std::optional<MemoryRecord> JsonlRecordSource::next() {
  std::string line;
  if (!next_line(*in_, line, line_no_)) return std::nullopt;
  const json obj = parse_line(line, line_no_);
  MemoryRecord rec;
  rec.sample_id = take_id(obj, "sample_id", line_no_);
  rec.item = take_string(obj, "item", line_no_);
  const auto it = obj.find("vector");
  if (it == obj.end()) bad_line(line_no_, "vector is missing");
  rec.vector = take_vector(*it, "vector", line_no_);
  return rec;
}

std::vector<Query> read_queries(std::istream& in) {
  std::vector<Query> out;
  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line, line_no)) {
    const json obj = parse_line(line, line_no);
    Query q;
    q.query_id = take_id(obj, "query_id", line_no);
    const auto it = obj.find("vector");
    if (it == obj.end()) bad_line(line_no, "vector is missing");
    q.vector = take_vector(*it, "vector", line_no);
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<EvalSample> read_eval_samples(std::istream& in) {
  std::vector<EvalSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line, line_no)) {
    const json obj = parse_line(line, line_no);
    EvalSample s;
    s.query.query_id = take_id(obj, "query_id", line_no);
    const auto it = obj.find("vector");
    if (it == obj.end()) bad_line(line_no, "vector is missing");
    s.query.vector = take_vector(*it, "vector", line_no);
    s.truth = take_string(obj, "truth", line_no);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<BeamRecord> read_beams(std::istream& in) {
  std::vector<BeamRecord> out;
  std::string line;
  std::size_t line_no = 0;
  std::uint32_t dim = 0;
  while (next_line(in, line, line_no)) {
    const json obj = parse_line(line, line_no);
    BeamRecord rec;
    rec.query_id = take_id(obj, "query_id", line_no);
    const auto it = obj.find("beams");
    if (it == obj.end() || !it->is_array() || it->empty()) {
      bad_line(line_no, "beams must be a non-empty array of arrays");
    }
    for (const json& beam : *it) {
      const std::vector<float> v = take_vector(beam, "beam", line_no);
      if (dim == 0) dim = std::uint32_t(v.size());
      if (v.size() != dim) {
        bad_line(line_no, "beam dimensions disagree");
      }
      rec.beams.embeddings.insert(rec.beams.embeddings.end(), v.begin(),
                                  v.end());
    }
    rec.beams.dim = dim;
    out.push_back(std::move(rec));
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string format_vector(const std::vector<float>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i != 0) out += ',';
    out += format_double(double(v[i]));
  }
  out += ']';
  return out;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += char(c);
        }
    }
  }
  return out;
}

std::string format_record(const MemoryRecord& rec) {
  return "{\"sample_id\":" + std::to_string(rec.sample_id) + ",\"item\":\"" +
         json_escape(rec.item) + "\",\"vector\":" + format_vector(rec.vector) +
         "}";
}

std::string format_ranked_line(const RankedList& ranked,
                               const ItemCatalog& catalog,
                               const std::string& mode,
                               const std::string& extras) {
  std::string out = "{\"query_id\":" + std::to_string(ranked.query_id) +
                    ",\"mode\":\"" + mode + "\"";
  if (!extras.empty()) {
    out += ',';
    out += extras;
  }
  out += ",\"k\":" + std::to_string(ranked.entries.size());
  out += ",\"items\":[";
  for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
    if (i != 0) out += ',';
    out += "{\"item\":\"" + json_escape(catalog.key_of(ranked.entries[i].item)) +
           "\",\"score\":" + format_double(ranked.entries[i].score) + "}";
  }
  out += "]}";
  return out;
}

}  // namespace l2d
