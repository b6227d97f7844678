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

#ifndef FAIRRECOURSE_IO_HPP_
#define FAIRRECOURSE_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairrecourse/blockrerank.hpp"
#include "fairrecourse/core.hpp"
#include "fairrecourse/metrics.hpp"

namespace fairrecourse {

// ---- Schema files -------------------------------------------------------

// Parses a JSON schema. Errors name the offending JSON path, or the line and
// column for malformed text. Weights are normalised to a maximum of 1.
Schema parse_schema(std::string_view text, const std::string& source = "<schema>");
Schema load_schema(const std::filesystem::path& path);

std::string schema_to_json(const Schema& schema);
void write_schema(const std::filesystem::path& path, const Schema& schema);

// ---- CSV ----------------------------------------------------------------

// Splits one CSV line. Fields may be double-quoted; "" inside quotes is a
// literal quote. Embedded line breaks are not supported.
std::vector<std::string> split_csv_line(std::string_view line);

// Quotes a field when it contains a comma, quote or leading/trailing blank.
std::string csv_field(std::string_view text);

// Maps CSV columns onto schema attributes.
class RecordParser {
 public:
  RecordParser(const std::vector<std::string>& header, const Schema& schema);

  // Parses and validates one data row. `line_number` is used in messages.
  Record parse(std::string_view line, std::size_t line_number) const;

 private:
  const Schema& schema_;
  std::vector<std::size_t> column_of_attribute_;
  std::optional<std::size_t> id_column_;
  std::optional<std::size_t> protected_column_;
  std::size_t columns_ = 0;
};

struct LoadOptions {
  bool skip_bad_rows = false;
};

struct LoadReport {
  std::vector<std::string> skipped;  // "line N: reason"
};

Dataset load_dataset(const std::filesystem::path& path, const Schema& schema,
                     const LoadOptions& options = {}, LoadReport* report = nullptr);
Dataset parse_dataset(std::string_view text, const Schema& schema, const LoadOptions& options = {},
                      LoadReport* report = nullptr);

void write_dataset(const std::filesystem::path& path, const Dataset& dataset, const Schema& schema);

// Line-by-line reader that remembers the byte offset of every line so that
// rows can be re-read later in any order.
class CsvFile {
 public:
  explicit CsvFile(const std::filesystem::path& path);

  const std::vector<std::string>& header() const noexcept { return header_; }
  // Next data line; false at end of file. Blank lines are skipped.
  bool next(std::string& line, std::uint64_t& offset, std::size_t& line_number);
  // Reads the data line starting at `offset`.
  std::string read_at(std::uint64_t offset);

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::vector<std::string> header_;
  std::uint64_t offset_ = 0;
  std::size_t line_number_ = 0;
};

// ---- Rankings -------------------------------------------------------------

struct RankingRow {
  std::size_t new_rank = 0;  // 1-based
  std::size_t orig_rank = 0;
  std::string id;
  std::string group;
  double orig_cost = 0.0;
  double new_cost = 0.0;
  bool modified = false;
  std::vector<std::string> modified_attrs;
  std::vector<double> values;

  bool operator==(const RankingRow&) const = default;
};

struct RankingTable {
  std::vector<std::string> attributes;
  std::vector<RankingRow> rows;

  bool operator==(const RankingTable&) const = default;
};

// Streams ranking rows to CSV:
//   new_rank,orig_rank,id,group,orig_cost,new_cost,modified,modified_attrs,<attributes...>
class RankingWriter {
 public:
  RankingWriter(const std::filesystem::path& path, const Schema& schema);

  void write(const RankingRow& row);
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t attributes_;
};

RankingTable read_ranking(const std::filesystem::path& path);

// ---- Metrics ------------------------------------------------------------

struct BlockSummary {
  std::size_t block_count = 0;
  std::size_t unfair_before = 0;
  std::size_t unfair_after = 0;
  std::size_t blocks_fixed = 0;
  std::size_t skipped = 0;

  bool operator==(const BlockSummary&) const = default;
};

BlockSummary summarize_blocks(std::span<const BlockReport> reports);

struct MetricsReport {
  std::string command;
  std::size_t records = 0;
  std::vector<std::string> excluded;  // ids without recourse
  double tau = 0.0;
  double phi = 0.0;
  std::size_t cutoff_step = 0;
  std::vector<std::string> groups;
  FairnessReport before;
  std::optional<FairnessReport> after;
  std::size_t interventions = 0;
  std::size_t recourse_unmet = 0;
  std::size_t exit_strategy_count = 0;
  std::optional<std::size_t> exit_position;
  double total_modification = 0.0;
  double avg_modification = 0.0;
  std::optional<BlockSummary> block_summary;
  std::vector<BlockReport> blocks;

  bool operator==(const MetricsReport&) const = default;
};

std::string metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(std::string_view text);
void write_metrics(const std::filesystem::path& path, const MetricsReport& report);
MetricsReport read_metrics(const std::filesystem::path& path);

// ---- Synthetic data ----------------------------------------------------------

// Seeded credit-style data set with a linear acceptance boundary that every
// generated record misses. Protected records sit `shift` units further from
// the boundary on every actionable attribute.
struct SyntheticSpec {
  std::size_t records = 1000;
  std::size_t attributes = 4;  // actionable attributes
  double protected_share = 0.3;
  double shift = 0.3;
  // Each protected record's shift is drawn from shift * [1 - j, 1 + j].
  double shift_jitter = 0.0;
  // Attribute k is 10 - base - spread * u_k^skew - shift * [protected] with
  // u_k = correlation * S + (1 - correlation) * U_k; S is drawn once per record
  // and U_k once per attribute, all U(0,1).
  double base = 0.0;
  double spread = 2.0;
  double skew = 1.0;
  double correlation = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

SyntheticSpec parse_synthetic_spec(std::string_view json_text);

struct SyntheticData {
  Schema schema;
  Dataset dataset;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

// Reads a whole file; IoError names the path on failure.
std::string read_file(const std::filesystem::path& path);

}  // namespace fairrecourse

#endif  // FAIRRECOURSE_IO_HPP_
