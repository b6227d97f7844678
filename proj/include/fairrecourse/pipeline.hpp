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

#ifndef FAIRRECOURSE_PIPELINE_HPP_
#define FAIRRECOURSE_PIPELINE_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "fairrecourse/blockrerank.hpp"
#include "fairrecourse/core.hpp"
#include "fairrecourse/counterfactual.hpp"
#include "fairrecourse/io.hpp"
#include "fairrecourse/metrics.hpp"
#include "fairrecourse/rerank.hpp"

namespace fairrecourse {

// Records with recourse, their counterfactuals, groups and cost ranking.
// Records without recourse are dropped up front and listed in `excluded`.
struct Prepared {
  Dataset dataset;
  std::vector<Counterfactual> counterfactuals;
  GroupPartition partition;
  Ranking ranking;
  std::vector<std::string> excluded;
};

Prepared prepare(const Dataset& dataset, const Schema& schema, unsigned threads = 1);

// Output rows for `order`, with interventions applied to the attribute values.
std::vector<RankingRow> ranking_rows(const Prepared& prepared, const Schema& schema,
                                     std::span<const std::size_t> order, std::span<const double> cost_of,
                                     std::span<const Intervention> interventions);

// Metrics skeleton holding the audit of the original cost ranking.
MetricsReport make_metrics(std::string command, std::size_t records, std::vector<std::string> excluded,
                           const FairnessConfig& config, const GroupPartition& partition,
                           FairnessReport before);

// Fills the block table, block summary and intervention totals.
void add_block_results(MetricsReport& metrics, std::span<const BlockReport> reports,
                       std::size_t interventions, double total_modification);

MetricsReport audit_metrics(const Prepared& prepared, const FairnessConfig& config);

// Metrics for a prefix re-ranking, including the before/after audit.
MetricsReport rerank_metrics(const Prepared& prepared, const FairnessConfig& config,
                             const ReRankResult& result);

MetricsReport block_metrics(const Prepared& prepared, const FairnessConfig& config,
                            const BlockResult& result);

}  // namespace fairrecourse

#endif  // FAIRRECOURSE_PIPELINE_HPP_
