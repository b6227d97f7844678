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

#ifndef FAIRRECOURSE_RERANK_HPP_
#define FAIRRECOURSE_RERANK_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fairrecourse/core.hpp"
#include "fairrecourse/counterfactual.hpp"
#include "fairrecourse/metrics.hpp"
#include "fairrecourse/modify.hpp"

namespace fairrecourse {

struct Intervention {
  std::size_t record = 0;               // record index
  std::vector<std::size_t> attributes;  // modified attributes, ascending
  std::vector<double> old_values;       // parallel to `attributes`
  std::vector<double> new_values;
  double old_cost = 0.0;
  double new_cost = 0.0;
  double distance = 0.0;  // weighted distance between the original and modified record
};

struct ReRankResult {
  std::vector<std::size_t> order;  // record indices, final rank order
  std::vector<double> cost_of;     // final cost by record index
  std::vector<Intervention> interventions;
  // Positions copied unchanged by the exit strategy, and where the copy began.
  std::size_t exit_strategy_count = 0;
  std::optional<std::size_t> exit_position;
  // 0-based positions of modified records whose prefix still violates the
  // recourse-fairness tolerance.
  std::vector<std::size_t> recourse_unmet;
  double total_modification = 0.0;
  double avg_modification = 0.0;  // total_modification / D
};

// Copy of `dataset` with every intervention applied.
Dataset apply_interventions(const Dataset& dataset, std::span<const Intervention> interventions);

// Builds an intervention record from a modification result.
Intervention make_intervention(std::size_t record, std::span<const double> original, double old_cost,
                               const Modification& modification, const Schema& schema);

// Prefix re-ranking.
//
// The output is built one position at a time. The next record of the
// original order is appended when the grown prefix stays representation-fair.
// Otherwise the remaining records are scanned in rank order for members of a
// group that would repair the prefix; the first one that can be modified to
// cost strictly less than the displaced record is moved up. When no candidate
// works, the rest of the list is copied unchanged.
//
// `counterfactuals` is indexed by record and must hold the counterfactual
// that produced `ranking.cost_of`.
ReRankResult rerank(const Ranking& ranking, const Dataset& dataset,
                    std::span<const Counterfactual> counterfactuals, const GroupPartition& partition,
                    const Schema& schema, const FairnessConfig& config);

}  // namespace fairrecourse

#endif  // FAIRRECOURSE_RERANK_HPP_
