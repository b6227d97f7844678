/*
 * Copyright 2026 The fairrecourse Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "fairrecourse/blockrerank.hpp"
#include "fairrecourse/io.hpp"
#include "fairrecourse/pipeline.hpp"
#include "fairrecourse/rerank.hpp"
#include "fairrecourse/stream.hpp"
#include "fairrecourse/text.hpp"
#include "json.hpp"

namespace fairrecourse::cli {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Phase timings go to stderr so that stdout and output files stay deterministic.
class PhaseTimer {
 public:
  void lap(const char* phase) {
    const auto now = Clock::now();
    std::cerr << "timing " << phase << "_ms=" << format_double(std::round(ms(now) * 1000.0) / 1000.0)
              << '\n';
    last_ = now;
  }

 private:
  double ms(Clock::time_point now) const {
    return std::chrono::duration<double, std::milli>(now - last_).count();
  }
  Clock::time_point last_ = Clock::now();
};

FairnessConfig make_config(const CommonOptions& common) {
  FairnessConfig config;
  config.tau = parse_fraction(common.tau, "--tau");
  config.phi = common.phi;
  config.cutoff_step = common.cutoff_step;
  try {
    config.validate();
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  return config;
}

Schema make_schema(const CommonOptions& common) {
  if (common.schema.empty()) throw UsageError("--schema is required");
  Schema schema = load_schema(common.schema);
  if (common.discretize || common.max_changed_attributes) {
    CounterfactualOptions options = schema.options();
    if (common.discretize) options.discretize = true;
    if (common.max_changed_attributes) options.max_changed_attributes = common.max_changed_attributes;
    schema = schema.with_options(options);
  }
  return schema;
}

Dataset load_input(const CommonOptions& common, const Schema& schema) {
  if (common.input.empty()) throw UsageError("--input is required");
  LoadReport report;
  Dataset data = load_dataset(common.input, schema, {common.skip_bad_rows}, &report);
  for (const auto& skipped : report.skipped) std::cerr << "skipped " << skipped << '\n';
  return data;
}

std::string optional_text(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : "-"; }

void print_fairness(const char* label, const FairnessReport& f) {
  std::cout << label << " r=" << format_double(f.r) << " rKL=" << format_double(f.quality.rkl)
            << " rND=" << format_double(f.quality.rnd) << " rRD=" << format_double(f.quality.rrd)
            << " first_representation_violation=" << optional_text(f.first_representation_violation)
            << " first_recourse_violation=" << optional_text(f.first_recourse_violation) << '\n';
}

void emit_metrics(const CommonOptions& common, const MetricsReport& metrics) {
  if (common.metrics_out.empty()) return;
  write_metrics(common.metrics_out, metrics);
}

void write_rows(const std::string& path, const Schema& schema, const std::vector<RankingRow>& rows) {
  RankingWriter writer(path, schema);
  for (const auto& row : rows) writer.write(row);
  writer.close();
}

void check_permutation(std::span<const std::size_t> order, std::size_t total) {
  if (order.size() != total) throw InvariantError("re-ranked list lost or duplicated records");
  std::vector<bool> seen(total, false);
  for (std::size_t id : order) {
    if (id >= total || seen[id]) throw InvariantError("re-ranked list is not a permutation");
    seen[id] = true;
  }
}

std::size_t resolve_block_count(const BlockOptions& options, std::size_t records) {
  if (options.blocks.has_value() == options.block_size.has_value()) {
    throw UsageError("give exactly one of --blocks and --block-size");
  }
  try {
    if (!options.blocks) return blocks_for_size(records, *options.block_size);
    (void)block_sizes(records, *options.blocks);
    return *options.blocks;
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
}

}  // namespace

double parse_fraction(const std::string& text, const std::string& flag) {
  const auto slash = text.find('/');
  std::optional<double> value;
  if (slash == std::string::npos) {
    value = parse_double(text);
  } else {
    const auto num = parse_double(std::string_view(text).substr(0, slash));
    const auto den = parse_double(std::string_view(text).substr(slash + 1));
    if (num && den && *den != 0.0) value = *num / *den;
  }
  if (!value || !std::isfinite(*value)) throw UsageError(flag + ": '" + text + "' is not a number or fraction");
  return *value;
}

int run_audit(const CommonOptions& common) {
  const FairnessConfig config = make_config(common);
  PhaseTimer timer;
  const Schema schema = make_schema(common);
  const Dataset data = load_input(common, schema);
  timer.lap("load");
  const Prepared prepared = prepare(data, schema, common.threads);
  timer.lap("counterfactuals_and_ranking");
  const MetricsReport metrics = audit_metrics(prepared, config);
  timer.lap("audit");

  emit_metrics(common, metrics);
  std::cout << "records=" << metrics.records << " excluded=" << metrics.excluded.size() << '\n';
  print_fairness("ranking", metrics.before);
  return 0;
}

int run_rerank(const CommonOptions& common, const RerankOptions& options) {
  const FairnessConfig config = make_config(common);
  PhaseTimer timer;
  const Schema schema = make_schema(common);
  const Dataset data = load_input(common, schema);
  timer.lap("load");
  const Prepared prepared = prepare(data, schema, common.threads);
  timer.lap("counterfactuals_and_ranking");
  const ReRankResult result =
      rerank(prepared.ranking, prepared.dataset, prepared.counterfactuals, prepared.partition, schema, config);
  timer.lap("rerank");
  check_permutation(result.order, prepared.dataset.size());

  const MetricsReport metrics = rerank_metrics(prepared, config, result);
  if (!options.ranking_out.empty()) {
    write_rows(options.ranking_out, schema,
               ranking_rows(prepared, schema, result.order, result.cost_of, result.interventions));
  }
  emit_metrics(common, metrics);
  timer.lap("write");

  std::cout << "records=" << metrics.records << " excluded=" << metrics.excluded.size()
            << " interventions=" << metrics.interventions
            << " exit_strategy_count=" << metrics.exit_strategy_count
            << " avg_modification=" << format_double(metrics.avg_modification) << '\n';
  print_fairness("before", metrics.before);
  print_fairness("after", *metrics.after);
  return 0;
}

int run_rerank_block(const CommonOptions& common, const BlockOptions& options) {
  const FairnessConfig config = make_config(common);
  if (options.blocks.has_value() == options.block_size.has_value()) {
    throw UsageError("give exactly one of --blocks and --block-size");
  }
  PhaseTimer timer;
  const Schema schema = make_schema(common);
  MetricsReport metrics;

  if (options.stream) {
    if (common.input.empty()) throw UsageError("--input is required");
    if (options.ranking_out.empty()) throw UsageError("--stream needs --ranking-out");
    StreamOptions stream;
    stream.block_count = options.blocks;
    stream.block_size = options.block_size;
    stream.load.skip_bad_rows = common.skip_bad_rows;
    StreamStats stats;
    metrics = stream_block_rerank(common.input, schema, config, stream, options.ranking_out, &stats);
    timer.lap("stream_rerank_block");
    std::cerr << "window peak_records=" << stats.peak_entries << '\n';
  } else {
    const Dataset data = load_input(common, schema);
    timer.lap("load");
    const Prepared prepared = prepare(data, schema, common.threads);
    timer.lap("counterfactuals_and_ranking");
    const std::size_t block_count = resolve_block_count(options, prepared.dataset.size());
    const BlockResult result = block_rerank(prepared.ranking, prepared.dataset, prepared.counterfactuals,
                                            prepared.partition, schema, config, block_count);
    timer.lap("rerank_block");
    check_permutation(result.order, prepared.dataset.size());
    metrics = block_metrics(prepared, config, result);
    if (!options.ranking_out.empty()) {
      write_rows(options.ranking_out, schema,
                 ranking_rows(prepared, schema, result.order, result.cost_of, result.interventions));
    }
  }
  emit_metrics(common, metrics);
  timer.lap("write");

  const BlockSummary& s = *metrics.block_summary;
  std::cout << "records=" << metrics.records << " excluded=" << metrics.excluded.size()
            << " blocks=" << s.block_count << " unfair_before=" << s.unfair_before
            << " unfair_after=" << s.unfair_after << " blocks_fixed=" << s.blocks_fixed
            << " skipped=" << s.skipped << " interventions=" << metrics.interventions
            << " avg_modification=" << format_double(metrics.avg_modification) << '\n';
  print_fairness("before", metrics.before);
  print_fairness("after", *metrics.after);
  return 0;
}

namespace {

struct SweepSpec {
  std::vector<std::size_t> blocks;
  std::vector<double> taus;
  double phi = 0.2;
  std::size_t repetitions = 1;
  std::optional<std::uint64_t> seed;
  std::optional<SyntheticSpec> synthetic;
};

SweepSpec load_sweep_spec(const std::string& path) {
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    throw SchemaError(path + ": malformed JSON");
  }
  auto fail = [&](const std::string& what) -> void { throw SchemaError(path + ": " + what); };
  if (!j.is_object()) fail("$: expected an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "blocks" && key != "taus" && key != "phi" && key != "repetitions" && key != "seed" &&
        key != "synthetic") {
      fail("$." + key + ": unknown key");
    }
  }
  SweepSpec spec;
  if (!j.contains("blocks") || !j["blocks"].is_array() || j["blocks"].empty()) fail("$.blocks: expected a non-empty array");
  for (const auto& b : j["blocks"]) {
    if (!b.is_number_integer() || b.get<long long>() < 1) fail("$.blocks: expected positive integers");
    spec.blocks.push_back(b.get<std::size_t>());
  }
  if (!j.contains("taus") || !j["taus"].is_array() || j["taus"].empty()) fail("$.taus: expected a non-empty array");
  for (const auto& t : j["taus"]) {
    double tau = 0.0;
    if (t.is_number()) {
      tau = t.get<double>();
    } else if (t.is_string()) {
      try {
        tau = parse_fraction(t.get<std::string>(), "$.taus");
      } catch (const UsageError& e) {
        fail(e.what());
      }
    } else {
      fail("$.taus: expected numbers or \"a/b\" strings");
    }
    if (!(tau > 0.0 && tau <= 1.0)) fail("$.taus: values must lie in (0, 1]");
    spec.taus.push_back(tau);
  }
  if (j.contains("phi")) {
    if (!j["phi"].is_number()) fail("$.phi: expected a number");
    spec.phi = j["phi"].get<double>();
  }
  if (j.contains("repetitions")) {
    if (!j["repetitions"].is_number_integer() || j["repetitions"].get<long long>() < 1) {
      fail("$.repetitions: expected a positive integer");
    }
    spec.repetitions = j["repetitions"].get<std::size_t>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail("$.seed: expected a non-negative integer");
    spec.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("synthetic")) {
    try {
      spec.synthetic = parse_synthetic_spec(j["synthetic"].dump());
    } catch (const SchemaError& e) {
      fail(std::string("$.synthetic") + (e.what() + 1));
    }
  }
  return spec;
}

}  // namespace

int run_sweep(const CommonOptions& common, const SweepOptions& options) {
  if (options.sweep_spec.empty()) throw UsageError("--sweep-spec is required");
  if (options.out_dir.empty()) throw UsageError("--out-dir is required");
  const SweepSpec spec = load_sweep_spec(options.sweep_spec);
  const bool from_file = !common.input.empty();
  if (!from_file && !spec.synthetic) throw UsageError("give --input and --schema, or a synthetic section");

  struct Cell {
    double unfair_before = 0, unfair_after = 0, blocks_fixed = 0, r_final = 0, runtime_ms = 0;
  };
  std::vector<Cell> cells(spec.blocks.size() * spec.taus.size());

  std::optional<Schema> file_schema;
  std::optional<Prepared> file_prepared;
  if (from_file) {
    file_schema = make_schema(common);
    file_prepared = prepare(load_input(common, *file_schema), *file_schema, common.threads);
  }

  for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
    std::optional<SyntheticData> synthetic;
    if (!from_file) {
      SyntheticSpec s = *spec.synthetic;
      s.seed = spec.seed.value_or(s.seed) + rep;
      synthetic = generate_synthetic(s);
    }
    const Schema& schema = from_file ? *file_schema : synthetic->schema;
    std::optional<Prepared> generated;
    if (!from_file) generated = prepare(synthetic->dataset, schema, common.threads);
    const Prepared& prepared = from_file ? *file_prepared : *generated;

    for (std::size_t bi = 0; bi < spec.blocks.size(); ++bi) {
      for (std::size_t ti = 0; ti < spec.taus.size(); ++ti) {
        FairnessConfig config;
        config.tau = spec.taus[ti];
        config.phi = spec.phi;
        config.cutoff_step = common.cutoff_step;
        try {
          config.validate();
          (void)block_sizes(prepared.dataset.size(), spec.blocks[bi]);
        } catch (const InputError& e) {
          throw UsageError(e.what());
        }
        const auto start = Clock::now();
        const BlockResult result = block_rerank(prepared.ranking, prepared.dataset, prepared.counterfactuals,
                                                prepared.partition, schema, config, spec.blocks[bi]);
        const double ms = elapsed_ms(start);
        const BlockSummary s = summarize_blocks(result.reports);
        const FairnessReport after = audit_ranking(result.order, result.cost_of, prepared.partition, config);
        Cell& c = cells[bi * spec.taus.size() + ti];
        c.unfair_before += static_cast<double>(s.unfair_before);
        c.unfair_after += static_cast<double>(s.unfair_after);
        c.blocks_fixed += static_cast<double>(s.blocks_fixed);
        c.r_final += after.r;
        c.runtime_ms += ms;
      }
    }
  }

  std::filesystem::create_directories(options.out_dir);
  const auto path = std::filesystem::path(options.out_dir) / "sweep.csv";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "B,tau,unfair_before,unfair_after,blocks_fixed,r_final,runtime_ms\n";
  const double reps = static_cast<double>(spec.repetitions);
  for (std::size_t bi = 0; bi < spec.blocks.size(); ++bi) {
    for (std::size_t ti = 0; ti < spec.taus.size(); ++ti) {
      const Cell& c = cells[bi * spec.taus.size() + ti];
      out << spec.blocks[bi] << ',' << format_double(spec.taus[ti]) << ',' << format_double(c.unfair_before / reps)
          << ',' << format_double(c.unfair_after / reps) << ',' << format_double(c.blocks_fixed / reps) << ','
          << format_double(c.r_final / reps) << ',' << format_double(std::round(c.runtime_ms / reps * 1000.0) / 1000.0)
          << '\n';
    }
  }
  out.close();
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  std::cout << "wrote " << path.string() << " (" << cells.size() << " cells)\n";
  return 0;
}

int run_synth(const SynthOptions& options) {
  if (options.spec.empty()) throw UsageError("--spec is required");
  if (options.out.empty()) throw UsageError("--out is required");
  const SyntheticSpec spec = parse_synthetic_spec(read_file(options.spec));
  PhaseTimer timer;
  const SyntheticData data = generate_synthetic(spec);
  timer.lap("generate");
  std::filesystem::create_directories(options.out);
  const auto dir = std::filesystem::path(options.out);
  write_dataset(dir / "data.csv", data.dataset, data.schema);
  write_schema(dir / "schema.json", data.schema);
  timer.lap("write");
  std::cout << "wrote " << (dir / "data.csv").string() << " and " << (dir / "schema.json").string() << " ("
            << data.dataset.size() << " records)\n";
  return 0;
}

}  // namespace fairrecourse::cli
