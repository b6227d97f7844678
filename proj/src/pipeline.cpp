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

#include "fairrecourse/pipeline.hpp"

#include <utility>

namespace fairrecourse {

Prepared prepare(const Dataset& dataset, const Schema& schema, unsigned threads) {
  CounterfactualBatch batch = recourse_costs(dataset, schema, threads);
  Prepared out;
  std::vector<double> costs;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!batch.results[i]) {
      out.excluded.push_back(dataset.records[i].id);
      continue;
    }
    out.dataset.records.push_back(dataset.records[i]);
    costs.push_back(batch.results[i]->cost);
    out.counterfactuals.push_back(std::move(*batch.results[i]));
  }
  if (out.dataset.empty()) throw InputError("no record has recourse under this schema");
  out.partition = partition(out.dataset, schema);
  out.ranking = rank_by_cost(costs);
  return out;
}

std::vector<RankingRow> ranking_rows(const Prepared& prepared, const Schema& schema,
                                     std::span<const std::size_t> order, std::span<const double> cost_of,
                                     std::span<const Intervention> interventions) {
  const std::size_t n = prepared.dataset.size();
  std::vector<std::size_t> orig_rank(n);
  for (std::size_t pos = 0; pos < prepared.ranking.size(); ++pos) orig_rank[prepared.ranking.order[pos]] = pos;
  std::vector<const Intervention*> by_record(n, nullptr);
  for (const Intervention& iv : interventions) by_record.at(iv.record) = &iv;

  std::vector<RankingRow> rows;
  rows.reserve(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t id = order[pos];
    const Record& rec = prepared.dataset.records[id];
    RankingRow row;
    row.new_rank = pos + 1;
    row.orig_rank = orig_rank[id] + 1;
    row.id = rec.id;
    row.group = rec.protected_value;
    row.orig_cost = prepared.ranking.cost_of[id];
    row.new_cost = cost_of[id];
    row.values = rec.values;
    if (const Intervention* iv = by_record[id]) {
      row.modified = true;
      for (std::size_t i = 0; i < iv->attributes.size(); ++i) {
        row.modified_attrs.push_back(schema.attribute(iv->attributes[i]).name);
        row.values[iv->attributes[i]] = iv->new_values[i];
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

MetricsReport make_metrics(std::string command, std::size_t records, std::vector<std::string> excluded,
                           const FairnessConfig& config, const GroupPartition& partition,
                           FairnessReport before) {
  MetricsReport m;
  m.command = std::move(command);
  m.records = records;
  m.excluded = std::move(excluded);
  m.tau = config.tau;
  m.phi = config.phi;
  m.cutoff_step = config.cutoff_step ? config.cutoff_step : default_cutoff_step(records);
  m.groups = partition.labels;
  m.before = std::move(before);
  return m;
}

void add_block_results(MetricsReport& metrics, std::span<const BlockReport> reports,
                       std::size_t interventions, double total_modification) {
  metrics.blocks.assign(reports.begin(), reports.end());
  metrics.block_summary = summarize_blocks(reports);
  metrics.interventions = interventions;
  metrics.total_modification = total_modification;
  metrics.avg_modification =
      metrics.records ? total_modification / static_cast<double>(metrics.records) : 0.0;
}

MetricsReport audit_metrics(const Prepared& prepared, const FairnessConfig& config) {
  const auto& r = prepared.ranking;
  return make_metrics("audit", r.size(), prepared.excluded, config, prepared.partition,
                      audit_ranking(r.order, r.cost_of, prepared.partition, config));
}

MetricsReport rerank_metrics(const Prepared& prepared, const FairnessConfig& config,
                             const ReRankResult& result) {
  const auto& r = prepared.ranking;
  MetricsReport m = make_metrics("rerank", r.size(), prepared.excluded, config, prepared.partition,
                                 audit_ranking(r.order, r.cost_of, prepared.partition, config));
  m.after = audit_ranking(result.order, result.cost_of, prepared.partition, config);
  m.interventions = result.interventions.size();
  m.recourse_unmet = result.recourse_unmet.size();
  m.exit_strategy_count = result.exit_strategy_count;
  m.exit_position = result.exit_position;
  m.total_modification = result.total_modification;
  m.avg_modification = result.avg_modification;
  return m;
}

MetricsReport block_metrics(const Prepared& prepared, const FairnessConfig& config,
                            const BlockResult& result) {
  const auto& r = prepared.ranking;
  MetricsReport m = make_metrics("rerank-block", r.size(), prepared.excluded, config, prepared.partition,
                                 audit_ranking(r.order, r.cost_of, prepared.partition, config));
  m.after = audit_ranking(result.order, result.cost_of, prepared.partition, config);
  add_block_results(m, result.reports, result.interventions.size(), result.total_modification);
  return m;
}

}  // namespace fairrecourse
