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

#include "fairrecourse/blockrerank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "fairrecourse/modify.hpp"

namespace fairrecourse {
namespace {

bool nearly_equal(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

double two_group_ratio(double a, double b) {
  const double means[] = {a, b};
  return ratio_from_means(means);
}

struct Tally {
  std::vector<std::size_t> counts;
  std::vector<double> sums;

  Tally(std::span<const BlockEntry> members, std::size_t groups) : counts(groups, 0), sums(groups, 0.0) {
    for (const auto& e : members) {
      ++counts[e.group];
      sums[e.group] += e.cost;
    }
  }
  double mean(std::size_t g) const { return counts[g] ? sums[g] / static_cast<double>(counts[g]) : 0.0; }
};

// Groups to exchange in an unfair block: `under` gains a member, `over`
// loses one. The most violating protected group decides the direction.
struct Exchange {
  std::size_t under;
  std::size_t over;
};

std::optional<Exchange> choose_exchange(const Tally& tally, const GroupPartition& partition,
                                        std::span<const double> eps) {
  std::size_t n = 0;
  for (std::size_t c : tally.counts) n += c;
  if (n == 0) return std::nullopt;
  const double size = static_cast<double>(n);

  std::optional<std::size_t> worst;
  double worst_excess = 0.0;
  for (std::size_t g : partition.protected_groups) {
    const double excess =
        std::abs(static_cast<double>(tally.counts[g]) / size - partition.ideal[g]) - eps[g];
    if (excess > kFairnessSlack && (!worst || excess > worst_excess)) {
      worst = g;
      worst_excess = excess;
    }
  }
  if (!worst) return std::nullopt;

  auto surplus = [&](std::size_t g) {
    return static_cast<double>(tally.counts[g]) - partition.ideal[g] * size;
  };
  const std::size_t v = *worst;
  const bool short_of = static_cast<double>(tally.counts[v]) / size < partition.ideal[v];
  std::optional<std::size_t> partner;
  for (std::size_t g = 0; g < tally.counts.size(); ++g) {
    if (g == v) continue;
    if (short_of) {
      if (tally.counts[g] == 0) continue;
      if (!partner || surplus(g) > surplus(*partner)) partner = g;
    } else if (!partner || surplus(g) < surplus(*partner)) {
      partner = g;
    }
  }
  if (!partner) return std::nullopt;
  return short_of ? Exchange{v, *partner} : Exchange{*partner, v};
}

void insert_by_cost(std::vector<BlockEntry>& members, BlockEntry entry, bool before_equal) {
  auto pos = before_equal
                 ? std::lower_bound(members.begin(), members.end(), entry.cost,
                                    [](const BlockEntry& e, double c) { return e.cost < c; })
                 : std::upper_bound(members.begin(), members.end(), entry.cost,
                                    [](double c, const BlockEntry& e) { return c < e.cost; });
  members.insert(pos, std::move(entry));
}

}  // namespace

std::vector<std::size_t> block_sizes(std::size_t records, std::size_t block_count) {
  if (block_count == 0) throw InputError("block count must be at least 1");
  if (block_count > records) throw InputError("more blocks than records");
  std::vector<std::size_t> sizes(block_count, records / block_count);
  sizes.back() += records % block_count;
  return sizes;
}

std::size_t blocks_for_size(std::size_t records, std::size_t block_size) {
  if (block_size == 0) throw InputError("block size must be at least 1");
  if (block_size > records) throw InputError("block size exceeds the number of records");
  return records / block_size;
}

std::vector<Block> make_blocks(const Ranking& ranking, const Dataset& dataset,
                               std::span<const Counterfactual> counterfactuals,
                               const GroupPartition& partition, std::size_t block_count) {
  const auto sizes = block_sizes(ranking.size(), block_count);
  std::vector<Block> blocks(block_count);
  std::size_t pos = 0;
  for (std::size_t b = 0; b < block_count; ++b) {
    blocks[b].index = b;
    blocks[b].members.reserve(sizes[b]);
    for (std::size_t i = 0; i < sizes[b]; ++i, ++pos) {
      const std::size_t id = ranking.order[pos];
      BlockEntry e;
      e.record = id;
      e.orig_rank = pos;
      e.group = partition.group_of[id];
      e.orig_cost = e.cost = ranking.cost_of[id];
      e.values = dataset.records[id].values;
      e.target = counterfactuals[id].point;
      blocks[b].members.push_back(std::move(e));
    }
  }
  return blocks;
}

std::optional<double> beta_bound(double m1, double m2, std::size_t s1, std::size_t s2, double c_bar) {
  if (s1 < 2 || m1 == 0.0) return std::nullopt;
  const double n1 = static_cast<double>(s1);
  const double n2 = static_cast<double>(s2);
  return (m1 * n1 - c_bar) * (m2 / m1) * (n2 + 1.0) / (n1 - 1.0) - m2 * n2;
}

double exchanged_ratio(double m1, double m2, std::size_t s1, std::size_t s2, double c_bar, double c) {
  const double n1 = static_cast<double>(s1);
  const double n2 = static_cast<double>(s2);
  const double m1_after = s1 >= 2 ? (m1 * n1 - c_bar) / (n1 - 1.0) : 0.0;
  const double m2_after = (m2 * n2 + c) / (n2 + 1.0);
  return two_group_ratio(m1_after, m2_after);
}

bool exchange_admits(double m1, double m2, std::size_t s1, std::size_t s2, double c_bar, double c) {
  const auto beta = beta_bound(m1, m2, s1, s2, c_bar);
  if (!beta) return true;
  const bool on_bound = nearly_equal(c, *beta);
  bool side = false;
  if (m1 < m2) {
    side = c <= *beta || on_bound;
  } else if (m1 > m2) {
    side = c >= *beta || on_bound;
  } else {
    side = on_bound;
  }
  if (!side) return false;
  // The bound assumes the group order of the means survives the exchange;
  // check the recomputed ratio so a flipped order cannot pass.
  return on_bound || exchanged_ratio(m1, m2, s1, s2, c_bar, c) > two_group_ratio(m1, m2);
}

BlockStats block_stats(std::span<const BlockEntry> members, const GroupPartition& partition,
                       std::span<const double> eps, double phi) {
  const Tally tally(members, partition.group_count());
  BlockStats s;
  s.size = members.size();
  s.counts = tally.counts;
  s.mean_costs.resize(tally.counts.size());
  for (std::size_t g = 0; g < tally.counts.size(); ++g) s.mean_costs[g] = tally.mean(g);
  if (s.size) {
    s.protected_share = static_cast<double>(tally.counts[partition.primary_protected()]) /
                        static_cast<double>(s.size);
  }
  s.r = ratio_from_means(s.mean_costs);
  s.representation_fair = fair_representation(tally.counts, partition, eps);
  s.recourse_fair = s.r >= 1.0 - phi - kFairnessSlack;
  return s;
}

BlockWindow::BlockWindow(const Schema& schema, const GroupPartition& partition,
                         const FairnessConfig& config, std::size_t block_count, Sink sink)
    : schema_(schema),
      partition_(partition),
      config_(config),
      eps_(representation_tolerance(partition, config.tau)),
      block_count_(block_count),
      sink_(std::move(sink)) {
  config_.validate();
  if (block_count_ == 0) throw InputError("block count must be at least 1");
}

void BlockWindow::push(Block block) {
  if (finished_) throw StreamError("block pushed after the stream finished");
  if (block.index != next_index_) {
    throw StreamError("expected block " + std::to_string(next_index_) + ", got block " +
                      std::to_string(block.index));
  }
  if (block.index >= block_count_) throw StreamError("more blocks than declared");
  ++next_index_;

  BlockReport report;
  report.index = block.index;
  report.before = block_stats(block.members, partition_, eps_, config_.phi);

  if (current_) {
    peak_ = std::max(peak_, current_->members.size() + block.members.size());
    Block& head = *current_;
    BlockReport& head_report = *current_report_;
    const std::size_t head_size = head.members.size();
    const std::size_t groups = partition_.group_count();

    for (std::size_t round = 0; round < head_size; ++round) {
      const Tally tally(head.members, groups);
      if (fair_representation(tally.counts, partition_, eps_)) break;
      const auto exchange = choose_exchange(tally, partition_, eps_);

      // Lowest-ranked member of the over-represented group that has not moved.
      std::optional<std::size_t> evict;
      if (exchange) {
        for (std::size_t i = head.members.size(); i-- > 0;) {
          const auto& e = head.members[i];
          if (e.group == exchange->over && !e.moved) {
            evict = i;
            break;
          }
        }
      }
      if (!evict) {
        head_report.skipped = true;
        break;
      }

      const std::size_t o = exchange->over;
      const std::size_t u = exchange->under;
      const double m1 = tally.mean(o);
      const double m2 = tally.mean(u);
      const std::size_t s1 = tally.counts[o];
      const std::size_t s2 = tally.counts[u];

      BlockEntry evicted = std::move(head.members[*evict]);
      head.members.erase(head.members.begin() + static_cast<std::ptrdiff_t>(*evict));
      const double c_bar = evicted.cost;
      const std::size_t evicted_record = evicted.record;
      evicted.moved = true;
      insert_by_cost(block.members, std::move(evicted), true);

      // Sums over the head block without the evicted record.
      std::vector<double> sums = tally.sums;
      std::vector<std::size_t> counts = tally.counts;
      sums[o] -= c_bar;
      --counts[o];

      bool promoted = false;
      for (std::size_t j = 0; j < block.members.size() && !promoted; ++j) {
        BlockEntry& y = block.members[j];
        if (y.group != u || y.moved) continue;

        double others_min = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < block.members.size(); ++k) {
          if (k != j) {
            others_min = block.members[k].cost;
            break;
          }
        }
        const CostPredicate rank_ok = [&](double c) {
          return (std::isinf(others_min) || overtakes(c, others_min)) &&
                 exchange_admits(m1, m2, s1, s2, c_bar, c);
        };
        const CostPredicate recourse_ok = [&](double c) {
          sums[u] += c;
          ++counts[u];
          std::vector<double> means(groups);
          for (std::size_t g = 0; g < groups; ++g) {
            means[g] = counts[g] ? sums[g] / static_cast<double>(counts[g]) : 0.0;
          }
          sums[u] -= c;
          --counts[u];
          return ratio_from_means(means) >= 1.0 - config_.phi - kFairnessSlack;
        };

        const auto mod = modify_toward(y.values, y.target, schema_, y.cost, rank_ok, recourse_ok);
        if (!mod) continue;
        if (!mod->attributes.empty()) {
          y.intervention = make_intervention(y.record, y.values, y.cost, *mod, schema_);
          y.values = mod->values;
          ++head_report.interventions;
        }
        y.cost = mod->cost;
        y.moved = true;
        BlockEntry up = std::move(y);
        block.members.erase(block.members.begin() + static_cast<std::ptrdiff_t>(j));
        insert_by_cost(head.members, std::move(up), false);
        promoted = true;
      }

      if (!promoted) {
        auto it = std::find_if(block.members.begin(), block.members.end(),
                               [&](const BlockEntry& e) { return e.record == evicted_record; });
        BlockEntry back = std::move(*it);
        block.members.erase(it);
        back.moved = false;
        head.members.insert(head.members.begin() + static_cast<std::ptrdiff_t>(*evict), std::move(back));
        head_report.skipped = true;
        break;
      }
    }

    if (head.members.size() != head_size) throw InvariantError("block size changed during re-ranking");
    settle();
  } else {
    peak_ = std::max(peak_, block.members.size());
  }

  report.at_entry = block_stats(block.members, partition_, eps_, config_.phi);
  current_ = std::move(block);
  current_report_ = std::move(report);
}

void BlockWindow::settle() {
  current_report_->after = block_stats(current_->members, partition_, eps_, config_.phi);
  if (!current_report_->after.representation_fair && current_report_->index + 1 < block_count_) {
    current_report_->skipped = true;
  }
  if (current_report_->skipped) ++skipped_;
  sink_(std::move(*current_), *current_report_);
  current_.reset();
  current_report_.reset();
}

void BlockWindow::finish() {
  if (finished_) return;
  if (next_index_ != block_count_) {
    throw StreamError("stream ended after " + std::to_string(next_index_) + " of " +
                      std::to_string(block_count_) + " blocks");
  }
  finished_ = true;
  if (current_) settle();
}

BlockResult block_rerank(const Ranking& ranking, const Dataset& dataset,
                         std::span<const Counterfactual> counterfactuals, const GroupPartition& partition,
                         const Schema& schema, const FairnessConfig& config, std::size_t block_count) {
  if (counterfactuals.size() != dataset.size() || partition.records() != dataset.size() ||
      ranking.cost_of.size() != dataset.size()) {
    throw InputError("ranking, dataset, counterfactuals and partition disagree in size");
  }
  auto blocks = make_blocks(ranking, dataset, counterfactuals, partition, block_count);

  BlockResult out;
  out.order.reserve(ranking.size());
  out.cost_of = ranking.cost_of;
  BlockWindow window(schema, partition, config, block_count, [&](Block&& block, const BlockReport& report) {
    for (auto& e : block.members) {
      out.order.push_back(e.record);
      out.cost_of[e.record] = e.cost;
      if (e.intervention) {
        out.total_modification += e.intervention->distance;
        out.interventions.push_back(std::move(*e.intervention));
      }
    }
    out.reports.push_back(report);
  });
  for (auto& b : blocks) window.push(std::move(b));
  window.finish();

  out.skipped_blocks = window.skipped_blocks();
  out.avg_modification =
      ranking.size() ? out.total_modification / static_cast<double>(ranking.size()) : 0.0;
  return out;
}

}  // namespace fairrecourse
