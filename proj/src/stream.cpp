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

#include "fairrecourse/stream.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>

#include "fairrecourse/blockrerank.hpp"
#include "fairrecourse/counterfactual.hpp"
#include "fairrecourse/pipeline.hpp"

namespace fairrecourse {
namespace {

struct IndexEntry {
  double cost;
  std::uint64_t offset;
  std::uint32_t group;
  std::uint64_t row;  // 1-based data row, the default id
};

}  // namespace

MetricsReport stream_block_rerank(const std::filesystem::path& input, const Schema& schema,
                                  const FairnessConfig& config, const StreamOptions& options,
                                  const std::filesystem::path& ranking_out, StreamStats* stats) {
  config.validate();
  if (options.block_count.has_value() == options.block_size.has_value()) {
    throw InputError("give exactly one of block count and block size");
  }

  CsvFile file(input);
  const RecordParser parser(file.header(), schema);

  // Pass 1: costs, offsets and groups only.
  std::vector<IndexEntry> index;
  std::vector<std::string> excluded;
  std::string line;
  std::uint64_t offset = 0;
  std::size_t line_number = 0;
  std::size_t row = 0;
  while (file.next(line, offset, line_number)) {
    ++row;
    Record rec;
    try {
      rec = parser.parse(line, line_number);
    } catch (const InputError& e) {
      if (!options.load.skip_bad_rows) throw InputError(input.string() + ": " + e.what());
      continue;
    }
    if (rec.id.empty()) rec.id = std::to_string(row);
    try {
      const double cost = counterfactual_for(rec.values, schema).cost;
      index.push_back({cost, offset, static_cast<std::uint32_t>(group_of(rec, schema)), row});
    } catch (const NoRecourseError&) {
      excluded.push_back(rec.id);
    }
  }
  if (index.empty() && excluded.empty()) throw InputError(input.string() + ": dataset has no records");
  if (index.empty()) throw InputError("no record has recourse under this schema");

  std::vector<std::size_t> groups(index.size());
  std::vector<double> costs(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    groups[i] = index[i].group;
    costs[i] = index[i].cost;
  }
  const GroupPartition part =
      make_partition(std::move(groups), schema.group_count(), schema.protected_groups(), schema.group_labels());
  const Ranking ranking = rank_by_cost(costs);
  costs = {};

  const std::size_t total = ranking.size();
  const std::size_t block_count =
      options.block_count ? *options.block_count : blocks_for_size(total, *options.block_size);
  const auto sizes = block_sizes(total, block_count);

  RankingAuditor before(part, config, total);
  for (std::size_t id : ranking.order) before.push(part.group_of[id], ranking.cost_of[id]);
  MetricsReport metrics =
      make_metrics("rerank-block", total, std::move(excluded), config, part, before.result());

  // Pass 2: records re-read in rank order, one block at a time.
  struct Label {
    std::string id;
    std::string group;
  };
  std::unordered_map<std::size_t, Label> labels;

  RankingWriter writer(ranking_out, schema);
  RankingAuditor after(part, config, total);
  std::vector<BlockReport> reports;
  std::size_t interventions = 0;
  double total_modification = 0.0;
  std::size_t new_rank = 0;

  BlockWindow window(schema, part, config, block_count, [&](Block&& block, const BlockReport& report) {
    for (BlockEntry& e : block.members) {
      auto it = labels.find(e.record);
      RankingRow out;
      out.new_rank = ++new_rank;
      out.orig_rank = e.orig_rank + 1;
      out.id = std::move(it->second.id);
      out.group = std::move(it->second.group);
      labels.erase(it);
      out.orig_cost = e.orig_cost;
      out.new_cost = e.cost;
      if (e.intervention) {
        out.modified = true;
        for (std::size_t k : e.intervention->attributes) out.modified_attrs.push_back(schema.attribute(k).name);
        total_modification += e.intervention->distance;
        ++interventions;
      }
      out.values = std::move(e.values);
      writer.write(out);
      after.push(e.group, e.cost);
    }
    reports.push_back(report);
  });

  std::size_t pos = 0;
  for (std::size_t b = 0; b < block_count; ++b) {
    Block block;
    block.index = b;
    block.members.reserve(sizes[b]);
    for (std::size_t i = 0; i < sizes[b]; ++i, ++pos) {
      const std::size_t id = ranking.order[pos];
      Record rec = parser.parse(file.read_at(index[id].offset), 0);
      if (rec.id.empty()) rec.id = std::to_string(index[id].row);
      BlockEntry e;
      e.record = id;
      e.orig_rank = pos;
      e.group = part.group_of[id];
      e.target = counterfactual_for(rec.values, schema).point;
      e.orig_cost = e.cost = ranking.cost_of[id];
      e.values = std::move(rec.values);
      labels.emplace(id, Label{std::move(rec.id), std::move(rec.protected_value)});
      block.members.push_back(std::move(e));
    }
    window.push(std::move(block));
  }
  window.finish();
  writer.close();

  metrics.after = after.result();
  add_block_results(metrics, reports, interventions, total_modification);
  if (stats) {
    stats->records = total;
    stats->peak_entries = window.peak_entries();
  }
  return metrics;
}

}  // namespace fairrecourse
