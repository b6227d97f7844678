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

#include "fairrecourse/rerank.hpp"

#include <algorithm>
#include <limits>

namespace fairrecourse {

Dataset apply_interventions(const Dataset& dataset, std::span<const Intervention> interventions) {
  Dataset out = dataset;
  for (const Intervention& iv : interventions) {
    auto& values = out.records.at(iv.record).values;
    for (std::size_t i = 0; i < iv.attributes.size(); ++i) values[iv.attributes[i]] = iv.new_values[i];
  }
  return out;
}

Intervention make_intervention(std::size_t record, std::span<const double> original, double old_cost,
                               const Modification& modification, const Schema& schema) {
  Intervention iv;
  iv.record = record;
  iv.attributes = modification.attributes;
  for (std::size_t k : iv.attributes) {
    iv.old_values.push_back(original[k]);
    iv.new_values.push_back(modification.values[k]);
  }
  iv.old_cost = old_cost;
  iv.new_cost = modification.cost;
  iv.distance = weighted_distance(original, modification.values, schema);
  return iv;
}

namespace {

// Rank positions of each group's members, consumed front to back. Records
// taken out of order are marked in `taken` and skipped lazily.
class GroupQueues {
 public:
  GroupQueues(const Ranking& ranking, const GroupPartition& partition)
      : positions_(partition.group_count()), heads_(partition.group_count(), 0),
        taken_(ranking.size(), false) {
    for (std::size_t pos = 0; pos < ranking.size(); ++pos) {
      positions_[partition.group_of[ranking.order[pos]]].push_back(pos);
    }
  }

  // Earliest untaken rank position of group g.
  std::optional<std::size_t> head(std::size_t g) {
    auto& h = heads_[g];
    while (h < positions_[g].size() && taken_[positions_[g][h]]) ++h;
    if (h == positions_[g].size()) return std::nullopt;
    return positions_[g][h];
  }

  std::optional<std::size_t> earliest() {
    std::optional<std::size_t> best;
    for (std::size_t g = 0; g < positions_.size(); ++g) {
      const auto h = head(g);
      if (h && (!best || *h < *best)) best = h;
    }
    return best;
  }

  const std::vector<std::size_t>& positions(std::size_t g) const { return positions_[g]; }
  std::size_t head_index(std::size_t g) const { return heads_[g]; }
  bool taken(std::size_t pos) const { return taken_[pos]; }
  void take(std::size_t pos) { taken_[pos] = true; }

 private:
  std::vector<std::vector<std::size_t>> positions_;
  std::vector<std::size_t> heads_;
  std::vector<bool> taken_;
};

}  // namespace

ReRankResult rerank(const Ranking& ranking, const Dataset& dataset,
                    std::span<const Counterfactual> counterfactuals, const GroupPartition& partition,
                    const Schema& schema, const FairnessConfig& config) {
  config.validate();
  const std::size_t total = ranking.size();
  if (counterfactuals.size() != dataset.size() || partition.records() != dataset.size() ||
      ranking.cost_of.size() != dataset.size()) {
    throw InputError("ranking, dataset, counterfactuals and partition disagree in size");
  }

  ReRankResult out;
  out.order.reserve(total);
  out.cost_of = ranking.cost_of;

  const std::vector<double> eps = representation_tolerance(partition, config.tau);
  const std::size_t groups = partition.group_count();
  std::vector<std::size_t> counts(groups, 0);
  std::vector<double> sums(groups, 0.0);
  GroupQueues queues(ranking, partition);

  auto append = [&](std::size_t pos, double cost) {
    const std::size_t id = ranking.order[pos];
    queues.take(pos);
    out.order.push_back(id);
    out.cost_of[id] = cost;
    ++counts[partition.group_of[id]];
    sums[partition.group_of[id]] += cost;
  };

  std::vector<std::size_t> grown(groups);
  auto fair_with = [&](std::size_t g) {
    grown = counts;
    ++grown[g];
    return fair_representation(grown, partition, eps);
  };

  for (std::size_t step = 0; step < total; ++step) {
    const std::size_t next = *queues.earliest();
    const std::size_t next_id = ranking.order[next];
    const std::size_t next_group = partition.group_of[next_id];
    if (step + 1 < 2 || fair_with(next_group)) {
      append(next, ranking.cost_of[next_id]);
      continue;
    }

    std::vector<std::size_t> repairing;
    for (std::size_t g = 0; g < groups; ++g) {
      if (g != next_group && fair_with(g)) repairing.push_back(g);
    }

    const double incumbent = ranking.cost_of[next_id];
    bool placed = false;
    if (!repairing.empty() && incumbent > 0.0) {
      // Walk the repairing groups' queues merged by rank position.
      std::vector<std::size_t> cursor;
      for (std::size_t g : repairing) cursor.push_back(queues.head_index(g));
      while (!placed) {
        std::size_t best_slot = repairing.size();
        std::size_t best_pos = std::numeric_limits<std::size_t>::max();
        for (std::size_t s = 0; s < repairing.size(); ++s) {
          const auto& list = queues.positions(repairing[s]);
          while (cursor[s] < list.size() && queues.taken(list[cursor[s]])) ++cursor[s];
          if (cursor[s] < list.size() && list[cursor[s]] < best_pos) {
            best_pos = list[cursor[s]];
            best_slot = s;
          }
        }
        if (best_slot == repairing.size()) break;
        ++cursor[best_slot];

        const std::size_t id = ranking.order[best_pos];
        const std::size_t g = partition.group_of[id];
        const Record& rec = dataset.records[id];
        const CostPredicate recourse_ok = [&](double cost) {
          sums[g] += cost;
          ++counts[g];
          const bool ok = recourse_ratio(sums, counts) >= 1.0 - config.phi - kFairnessSlack;
          sums[g] -= cost;
          --counts[g];
          return ok;
        };
        const auto mod = modify_for_rank(rec.values, counterfactuals[id].point, schema,
                                         ranking.cost_of[id], incumbent, recourse_ok);
        if (!mod) continue;
        if (!mod->attributes.empty()) {
          out.interventions.push_back(
              make_intervention(id, rec.values, ranking.cost_of[id], *mod, schema));
          out.total_modification += out.interventions.back().distance;
        }
        if (!mod->fairness_met) out.recourse_unmet.push_back(step);
        append(best_pos, mod->cost);
        placed = true;
      }
    }
    if (placed) continue;

    out.exit_position = step;
    out.exit_strategy_count = total - step;
    while (const auto pos = queues.earliest()) append(*pos, ranking.cost_of[ranking.order[*pos]]);
    break;
  }

  out.avg_modification = total ? out.total_modification / static_cast<double>(total) : 0.0;
  return out;
}

}  // namespace fairrecourse
