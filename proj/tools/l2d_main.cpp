#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "l2d/aggregate.hpp"
#include "l2d/bench.hpp"
#include "l2d/decode.hpp"
#include "l2d/error.hpp"
#include "l2d/ground.hpp"
#include "l2d/memory.hpp"
#include "l2d/memory_io.hpp"
#include "l2d/metrics.hpp"
#include "l2d/parallel.hpp"
#include "l2d/records.hpp"
#include "l2d/synth.hpp"

namespace {

using namespace l2d;

// "-" means stdin / stdout.
std::unique_ptr<std::istream> open_input(const std::string& path) {
  if (path == "-") return nullptr;
  auto in = std::make_unique<std::ifstream>(path);
  if (!*in) fail(Errc::io, "cannot open " + path);
  return in;
}

std::istream& input_or_stdin(const std::unique_ptr<std::istream>& in) {
  return in ? *in : std::cin;
}

std::unique_ptr<std::ostream> open_output(const std::string& path) {
  if (path.empty() || path == "-") return nullptr;
  auto out = std::make_unique<std::ofstream>(path);
  if (!*out) fail(Errc::io, "cannot open " + path + " for writing");
  return out;
}

std::ostream& output_or_stdout(const std::unique_ptr<std::ostream>& out) {
  return out ? *out : std::cout;
}

StorageDtype parse_dtype(const std::string& name) {
  if (name == "f32") return StorageDtype::f32;
  if (name == "f16") return StorageDtype::f16;
  fail(Errc::invalid_argument, "dtype must be f32 or f16");
}

DecodeMode parse_mode(const std::string& name) {
  if (name == "global") return DecodeMode::global;
  if (name == "local") return DecodeMode::local;
  fail(Errc::invalid_argument, "mode must be global or local");
}

Backfill parse_backfill(const std::string& name) {
  if (name == "global") return Backfill::global;
  if (name == "truncate") return Backfill::truncate;
  fail(Errc::invalid_argument, "backfill must be global or truncate");
}

std::string format_ks(const std::vector<std::uint32_t>& ks) {
  std::string out = "[";
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (i != 0) out += ',';
    out += std::to_string(ks[i]);
  }
  return out + "]";
}

std::string format_metrics(const MetricsReport& report) {
  std::string out = "[";
  bool first = true;
  for (const auto& [k, km] : report.per_k) {
    if (!first) out += ',';
    first = false;
    out += "{\"k\":" + std::to_string(k) +
           ",\"recall\":" + format_double(km.recall) +
           ",\"ndcg\":" + format_double(km.ndcg) + "}";
  }
  return out + "]";
}

std::string report_line(const MetricsReport& report) {
  return "{\"cohort\":\"" + report.cohort +
         "\",\"samples\":" + std::to_string(report.sample_count) +
         ",\"missing_truth\":" + std::to_string(report.missing_truth) +
         ",\"metrics\":" + format_metrics(report) + "}";
}

struct DecodeOpts {
  std::string memory;
  std::string queries;
  std::string mode = "global";
  std::uint32_t k = 10;
  std::uint32_t m = 0;
  std::string backfill = "global";
  double epsilon = 1e-9;
  unsigned threads = 1;
  std::string output;
};

// Shared by decode/eval/sweep/bench: resolves the decode configuration and
// rejects local mode without a neighborhood size as a usage error.
DecodeConfig make_decode_config(const std::string& command,
                                const DecodeOpts& opt, bool* usage_error) {
  DecodeConfig cfg;
  cfg.mode = parse_mode(opt.mode);
  cfg.k = opt.k;
  cfg.m = opt.m;
  cfg.backfill = parse_backfill(opt.backfill);
  cfg.epsilon = opt.epsilon;
  if (cfg.mode == DecodeMode::local && cfg.m == 0) {
    std::cerr << command << ": --M is required with --mode local\n";
    *usage_error = true;
  }
  return cfg;
}

int run_build(const std::string& input, std::uint32_t dim,
              const std::string& output, const std::string& dtype) {
  const StorageDtype storage = parse_dtype(dtype);
  auto in = open_input(input);
  JsonlRecordSource source(input_or_stdin(in));
  const MemorySet m = MemorySet::build(source, dim);
  save_memory(m, output, storage);
  std::cout << "{\"count\":" << m.count() << ",\"items\":"
            << m.catalog().size() << ",\"dim\":" << m.dim() << ",\"path\":\""
            << json_escape(output) << "\"}\n";
  return 0;
}

int run_stats(const std::string& memory) {
  const MemorySet m = load_memory(memory);
  const MemoryStats s = memory_stats(m);
  std::cout << "{\"count\":" << s.count << ",\"items\":" << s.items
            << ",\"dim\":" << s.dim << ",\"freq_min\":" << s.freq_min
            << ",\"freq_median\":" << s.freq_median
            << ",\"freq_max\":" << s.freq_max << "}\n";
  return 0;
}

int run_sample(const std::string& input, std::size_t capacity,
               std::uint64_t seed, const std::string& output) {
  auto in = open_input(input);
  JsonlRecordSource source(input_or_stdin(in));
  const auto kept = reservoir_sample(source, capacity, seed);
  auto out_file = open_output(output);
  std::ostream& out = output_or_stdout(out_file);
  for (const MemoryRecord& rec : kept) out << format_record(rec) << "\n";
  out.flush();
  std::cerr << "kept " << kept.size() << " records\n";
  return 0;
}

int run_decode(const DecodeOpts& opt) {
  bool usage_error = false;
  const DecodeConfig cfg = make_decode_config("decode", opt, &usage_error);
  if (usage_error) return 1;

  const MemorySet m = load_memory(opt.memory);
  auto in = open_input(opt.queries);
  const auto queries = read_queries(input_or_stdin(in));
  const ItemRepTable global_table = global_representations(m);
  const auto outcomes = batch_decode(queries, m, global_table, cfg,
                                     opt.threads);

  auto out_file = open_output(opt.output);
  std::ostream& out = output_or_stdout(out_file);
  const std::string extras =
      cfg.mode == DecodeMode::local
          ? "\"backfill\":\"" + opt.backfill + "\""
          : "";
  bool any_failed = false;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].ok) {
      out << format_ranked_line(outcomes[i].list, m.catalog(), opt.mode,
                                extras)
          << "\n";
    } else {
      any_failed = true;
      out << "{\"query_id\":" << queries[i].query_id << ",\"error\":\""
          << json_escape(outcomes[i].error) << "\"}\n";
    }
  }
  out.flush();
  return any_failed ? 2 : 0;
}

struct EvalOpts {
  DecodeOpts decode;
  std::string samples;
  std::vector<std::uint32_t> ks = {1, 5, 10, 20};
  std::uint32_t sparse_threshold = 5;
};

int run_eval(const EvalOpts& opt) {
  bool usage_error = false;
  const DecodeConfig cfg = make_decode_config("eval", opt.decode, &usage_error);
  if (usage_error) return 1;

  const MemorySet m = load_memory(opt.decode.memory);
  auto in = open_input(opt.samples);
  const auto samples = read_eval_samples(input_or_stdin(in));
  const ItemRepTable global_table = global_representations(m);

  auto out_file = open_output(opt.decode.output);
  std::ostream& out = output_or_stdout(out_file);
  out << "{\"command\":\"eval\",\"mode\":\"" << opt.decode.mode
      << "\",\"M\":" << cfg.m << ",\"ks\":" << format_ks(opt.ks)
      << ",\"epsilon\":" << format_double(cfg.epsilon)
      << ",\"threads\":" << effective_threads(opt.decode.threads)
      << ",\"sparse_threshold\":" << opt.sparse_threshold << "}\n";

  out << report_line(evaluate(samples, m, global_table, cfg, opt.ks,
                              opt.decode.threads, "overall"))
      << "\n";
  const auto [sparse, dense] =
      cohort_split(samples, m.catalog(), opt.sparse_threshold);
  out << report_line(evaluate(sparse, m, global_table, cfg, opt.ks,
                              opt.decode.threads, "sparse"))
      << "\n";
  out << report_line(evaluate(dense, m, global_table, cfg, opt.ks,
                              opt.decode.threads, "dense"))
      << "\n";
  out.flush();
  return 0;
}

struct SweepOpts {
  std::string memory;
  std::string samples;
  std::vector<std::uint32_t> ms;
  std::vector<std::uint32_t> ks = {1, 5, 10, 20};
  double epsilon = 1e-9;
  unsigned threads = 1;
  std::string output;
};

int run_sweep(const SweepOpts& opt) {
  const MemorySet m = load_memory(opt.memory);
  auto in = open_input(opt.samples);
  const auto samples = read_eval_samples(input_or_stdin(in));
  const ItemRepTable global_table = global_representations(m);

  DecodeConfig base;
  base.epsilon = opt.epsilon;

  auto out_file = open_output(opt.output);
  std::ostream& out = output_or_stdout(out_file);
  out << "{\"command\":\"sweep\",\"Ms\":" << format_ks(opt.ms)
      << ",\"ks\":" << format_ks(opt.ks)
      << ",\"epsilon\":" << format_double(opt.epsilon)
      << ",\"threads\":" << effective_threads(opt.threads) << "}\n";
  for (const SweepRow& row :
       sweep_m(samples, m, global_table, base, opt.ms, opt.ks, opt.threads)) {
    out << "{\"M\":" << row.m
        << ",\"samples\":" << row.report.sample_count
        << ",\"missing_truth\":" << row.report.missing_truth
        << ",\"metrics\":" << format_metrics(row.report) << "}\n";
  }
  out.flush();
  return 0;
}

struct GroundOpts {
  std::string memory;
  std::string beams;
  std::uint32_t k = 10;
  double epsilon = 1e-9;
  std::string output;
};

int run_ground(const GroundOpts& opt) {
  const MemorySet m = load_memory(opt.memory);
  auto in = open_input(opt.beams);
  const auto beam_records = read_beams(input_or_stdin(in));
  const ItemRepTable candidates = global_representations(m);

  auto out_file = open_output(opt.output);
  std::ostream& out = output_or_stdout(out_file);
  for (const BeamRecord& rec : beam_records) {
    const RankedList ranked =
        ground_beams(rec.beams, candidates, opt.k, opt.epsilon, rec.query_id);
    out << format_ranked_line(ranked, m.catalog(), "grounding") << "\n";
  }
  out.flush();
  return 0;
}

struct BenchOpts {
  DecodeOpts decode;
  std::uint32_t repetitions = 5;
  std::vector<unsigned> threads;
};

int run_bench(const BenchOpts& opt) {
  bool usage_error = false;
  const DecodeConfig cfg = make_decode_config("bench", opt.decode, &usage_error);
  if (usage_error) return 1;

  const MemorySet m = load_memory(opt.decode.memory);
  auto in = open_input(opt.decode.queries);
  const auto queries = read_queries(input_or_stdin(in));
  const ItemRepTable global_table = global_representations(m);

  std::vector<unsigned> thread_counts = opt.threads;
  if (thread_counts.empty()) {
    thread_counts.push_back(1);
    if (effective_threads(0) > 1) thread_counts.push_back(effective_threads(0));
  }

  auto out_file = open_output(opt.decode.output);
  std::ostream& out = output_or_stdout(out_file);
  out << "{\"command\":\"bench\",\"mode\":\"" << opt.decode.mode
      << "\",\"K\":" << cfg.k << ",\"M\":" << cfg.m
      << ",\"queries\":" << queries.size()
      << ",\"repetitions\":" << opt.repetitions << "}\n";
  for (unsigned t : thread_counts) {
    const LatencyReport r =
        bench_decode(queries, m, global_table, cfg, opt.repetitions, t);
    out << "{\"threads\":" << r.threads
        << ",\"batch_seconds\":" << format_double(r.batch_seconds)
        << ",\"scan_seconds\":" << format_double(r.scan_seconds)
        << ",\"aggregate_seconds\":" << format_double(r.aggregate_seconds)
        << ",\"rank_seconds\":" << format_double(r.rank_seconds)
        << ",\"p50_ms\":" << format_double(r.p50_ms)
        << ",\"p95_ms\":" << format_double(r.p95_ms)
        << ",\"qps\":" << format_double(r.queries_per_second)
        << ",\"resident_bytes\":" << r.resident_bytes << "}\n";
  }
  out.flush();
  return 0;
}

struct SynthOpts {
  std::uint32_t items = 100;
  std::uint32_t dim = 64;
  std::uint32_t per_item = 20;
  double sigma = 0.05;
  std::uint32_t queries = 1000;
  std::uint64_t seed = 42;
  std::string records_out;
  std::string samples_out;
};

int run_synth(const SynthOpts& opt) {
  SynthSpec spec;
  spec.num_items = opt.items;
  spec.dim = opt.dim;
  spec.samples_per_item = opt.per_item;
  spec.noise_sigma = opt.sigma;
  spec.query_count = opt.queries;
  spec.seed = opt.seed;
  const SynthData data = synth_dataset(spec);

  if (!opt.records_out.empty()) {
    auto out_file = open_output(opt.records_out);
    std::ostream& out = output_or_stdout(out_file);
    const auto& m = data.memory;
    for (std::uint64_t r = 0; r < m.count(); ++r) {
      MemoryRecord rec;
      rec.sample_id = r;
      rec.item = m.catalog().key_of(m.item_of_row(r));
      rec.vector.assign(m.row(r).begin(), m.row(r).end());
      out << format_record(rec) << "\n";
    }
    out.flush();
  }
  if (!opt.samples_out.empty()) {
    auto out_file = open_output(opt.samples_out);
    std::ostream& out = output_or_stdout(out_file);
    for (const EvalSample& s : data.samples) {
      out << "{\"query_id\":" << s.query.query_id << ",\"vector\":"
          << format_vector(s.query.vector) << ",\"truth\":\""
          << json_escape(s.truth) << "\"}\n";
    }
    out.flush();
  }

  const double separation =
      mean_centroid_separation(data.centroids, opt.items, opt.dim);
  std::cout << "{\"items\":" << opt.items << ",\"dim\":" << opt.dim
            << ",\"rows\":" << data.memory.count()
            << ",\"queries\":" << data.samples.size()
            << ",\"sigma\":" << format_double(opt.sigma)
            << ",\"seed\":" << opt.seed
            << ",\"centroid_separation\":" << format_double(separation)
            << "}\n";
  return 0;
}

void add_decode_options(CLI::App* cmd, DecodeOpts& opt, bool with_queries) {
  cmd->add_option("--memory", opt.memory, "Memory container path")
      ->required();
  if (with_queries) {
    cmd->add_option("--queries", opt.queries,
                    "Queries JSONL path ('-' for stdin)")
        ->required();
  }
  cmd->add_option("--mode", opt.mode, "Aggregation mode: global or local")
      ->check(CLI::IsMember({"global", "local"}));
  cmd->add_option("--K,--k", opt.k, "Number of items to return");
  cmd->add_option("--M,--m", opt.m, "Neighborhood size for local mode");
  cmd->add_option("--backfill", opt.backfill,
                  "Tail handling in local mode: global or truncate")
      ->check(CLI::IsMember({"global", "truncate"}));
  cmd->add_option("--epsilon", opt.epsilon, "Score guard added to distances");
  cmd->add_option("--threads", opt.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--output,-o", opt.output, "Output path (default stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-space decoder over a memory of hidden states"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read defaults from an INI file");

  std::string build_input = "-";
  std::uint32_t build_dim = 0;
  std::string build_output;
  std::string build_dtype = "f32";
  auto* build_cmd =
      app.add_subcommand("build", "Ingest JSONL records into a container");
  build_cmd->add_option("--input", build_input,
                        "Records JSONL path ('-' for stdin)");
  build_cmd->add_option("--dim", build_dim, "Vector dimensionality")
      ->required();
  build_cmd->add_option("--output,-o", build_output, "Container path")
      ->required();
  build_cmd->add_option("--dtype", build_dtype, "Matrix storage: f32 or f16")
      ->check(CLI::IsMember({"f32", "f16"}));

  std::string stats_memory;
  auto* stats_cmd = app.add_subcommand("stats", "Describe a memory container");
  stats_cmd->add_option("--memory", stats_memory, "Memory container path")
      ->required();

  std::string sample_input = "-";
  std::size_t sample_capacity = 0;
  std::uint64_t sample_seed = 42;
  std::string sample_output;
  auto* sample_cmd = app.add_subcommand(
      "sample", "Uniformly sample records from a JSONL stream");
  sample_cmd->add_option("--input", sample_input,
                         "Records JSONL path ('-' for stdin)");
  sample_cmd->add_option("--capacity", sample_capacity, "Records to keep")
      ->required();
  sample_cmd->add_option("--seed", sample_seed, "Sampling seed");
  sample_cmd->add_option("--output,-o", sample_output,
                         "Output path (default stdout)");

  DecodeOpts decode_opts;
  auto* decode_cmd =
      app.add_subcommand("decode", "Rank items for each query");
  add_decode_options(decode_cmd, decode_opts, true);

  EvalOpts eval_opts;
  auto* eval_cmd = app.add_subcommand(
      "eval", "Score ranked decoding against ground truth");
  add_decode_options(eval_cmd, eval_opts.decode, false);
  eval_cmd->add_option("--samples", eval_opts.samples,
                       "Eval samples JSONL path ('-' for stdin)")
      ->required();
  eval_cmd->add_option("--Ks", eval_opts.ks, "Cutoffs to report");
  eval_cmd->add_option("--sparse-threshold", eval_opts.sparse_threshold,
                       "Max truth frequency for the sparse cohort");

  SweepOpts sweep_opts;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Evaluate local decoding across neighborhood sizes");
  sweep_cmd->add_option("--memory", sweep_opts.memory, "Memory container path")
      ->required();
  sweep_cmd->add_option("--samples", sweep_opts.samples,
                        "Eval samples JSONL path ('-' for stdin)")
      ->required();
  sweep_cmd->add_option("--Ms", sweep_opts.ms, "Neighborhood sizes to try")
      ->required();
  sweep_cmd->add_option("--Ks", sweep_opts.ks, "Cutoffs to report");
  sweep_cmd->add_option("--epsilon", sweep_opts.epsilon,
                        "Score guard added to distances");
  sweep_cmd->add_option("--threads", sweep_opts.threads,
                        "Worker threads (0 = all cores)");
  sweep_cmd->add_option("--output,-o", sweep_opts.output,
                        "Output path (default stdout)");

  GroundOpts ground_opts;
  auto* ground_cmd = app.add_subcommand(
      "ground", "Map beam embeddings onto catalog items");
  ground_cmd->add_option("--memory", ground_opts.memory,
                         "Memory container path")
      ->required();
  ground_cmd->add_option("--beams", ground_opts.beams,
                         "Beam JSONL path ('-' for stdin)")
      ->required();
  ground_cmd->add_option("--K,--k", ground_opts.k, "Unique items to keep");
  ground_cmd->add_option("--epsilon", ground_opts.epsilon,
                         "Score guard added to distances");
  ground_cmd->add_option("--output,-o", ground_opts.output,
                         "Output path (default stdout)");

  BenchOpts bench_opts;
  auto* bench_cmd =
      app.add_subcommand("bench", "Measure decode latency and throughput");
  add_decode_options(bench_cmd, bench_opts.decode, true);
  bench_cmd->add_option("--repetitions", bench_opts.repetitions,
                        "Batch repetitions, first is warmup");
  bench_cmd
      ->add_option("--bench-threads", bench_opts.threads,
                   "Thread counts to measure (default: 1 and all cores)")
      ->delimiter(',');

  SynthOpts synth_opts;
  auto* synth_cmd = app.add_subcommand(
      "synth", "Generate a clustered synthetic dataset");
  synth_cmd->add_option("--items", synth_opts.items, "Distinct items");
  synth_cmd->add_option("--dim", synth_opts.dim, "Vector dimensionality");
  synth_cmd->add_option("--per-item", synth_opts.per_item,
                        "Memory rows per item");
  synth_cmd->add_option("--sigma", synth_opts.sigma,
                        "Per-coordinate noise around each centroid");
  synth_cmd->add_option("--queries", synth_opts.queries, "Eval samples");
  synth_cmd->add_option("--seed", synth_opts.seed, "Generator seed");
  synth_cmd->add_option("--records-out", synth_opts.records_out,
                        "Memory records JSONL path");
  synth_cmd->add_option("--samples-out", synth_opts.samples_out,
                        "Eval samples JSONL path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (build_cmd->parsed()) {
      return run_build(build_input, build_dim, build_output, build_dtype);
    }
    if (stats_cmd->parsed()) return run_stats(stats_memory);
    if (sample_cmd->parsed()) {
      return run_sample(sample_input, sample_capacity, sample_seed,
                        sample_output);
    }
    if (decode_cmd->parsed()) return run_decode(decode_opts);
    if (eval_cmd->parsed()) return run_eval(eval_opts);
    if (sweep_cmd->parsed()) return run_sweep(sweep_opts);
    if (ground_cmd->parsed()) return run_ground(ground_opts);
    if (bench_cmd->parsed()) return run_bench(bench_opts);
    if (synth_cmd->parsed()) return run_synth(synth_opts);
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << " [" << errc_name(e.code())
              << "]\n";
    return e.code() == Errc::invalid_argument ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
