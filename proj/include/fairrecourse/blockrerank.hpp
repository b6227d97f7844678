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

#ifndef FAIRRECOURSE_BLOCKRERANK_HPP_
#define FAIRRECOURSE_BLOCKRERANK_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fairrecourse/core.hpp"
#include "fairrecourse/counterfactual.hpp"
#include "fairrecourse/metrics.hpp"
#include "fairrecourse/rerank.hpp"

namespace fairrecourse {

struct BlockEntry {
  std::size_t record = 0;     // record index in the dataset
  std::size_t orig_rank = 0;  // 0-based position in the cost ranking
  std::size_t group = 0;
  double orig_cost = 0.0;
  double cost = 0.0;
  std::vector<double> values;  // current values
  std::vector<double> target;  // counterfactual of the original values
  std::optional<Intervention> intervention;
  bool moved = false;  // changed block during re-ranking
};

struct Block {
  std::size_t index = 0;
  std::vector<BlockEntry> members;  // ascending cost
};

struct BlockStats {
  std::size_t size = 0;
  std::vector<std::size_t> counts;
  std::vector<double> mean_costs;  // 0 for absent groups
  double protected_share = 0.0;    // share of the primary protected group
  double r = 1.0;                  // absent groups count as mean cost 0
  bool representation_fair = true;
  bool recourse_fair = true;

  bool operator==(const BlockStats&) const = default;
};

struct BlockReport {
  std::size_t index = 0;
  BlockStats before;    // block as cut from the cost ranking
  BlockStats at_entry;  // after spillover from the previous block
  BlockStats after;
  std::size_t interventions = 0;
  bool skipped = false;  // a violation remained and the block was copied as is

  bool fixed() const noexcept { return !before.representation_fair && after.representation_fair; }

  bool operator==(const BlockReport&) const = default;
};

struct BlockResult {
  std::vector<std::size_t> order;  // record indices, final rank order
  std::vector<double> cost_of;     // final cost by record index
  std::vector<Intervention> interventions;
  std::vector<BlockReport> reports;
  std::size_t skipped_blocks = 0;
  double total_modification = 0.0;
  double avg_modification = 0.0;
};

// Sizes of B contiguous blocks over D records: floor(D/B) each, with the
// remainder added to the last block.
std::vector<std::size_t> block_sizes(std::size_t records, std::size_t block_count);

// Number of blocks when every block should hold `block_size` records.
std::size_t blocks_for_size(std::size_t records, std::size_t block_size);

std::vector<Block> make_blocks(const Ranking& ranking, const Dataset& dataset,
                               std::span<const Counterfactual> counterfactuals,
                               const GroupPartition& partition, std::size_t block_count);

// Cost bound for a promoted point when x_bar (cost c_bar) of the
// over-represented group (mean M1, count s1) leaves the block and one point
// joins the under-represented group (mean M2, count s2):
//   beta = (M1*s1 - c_bar) * (M2/M1) * (s2 + 1) / (s1 - 1) - M2*s2.
// Undefined (nullopt) when s1 < 2 or M1 == 0.
std::optional<double> beta_bound(double m1, double m2, std::size_t s1, std::size_t s2, double c_bar);

// Two-group block ratio after the exchange described above.
double exchanged_ratio(double m1, double m2, std::size_t s1, std::size_t s2, double c_bar, double c);

// Admission test for a promoted cost c. With beta defined, c must lie on the
// improving side of beta (c <= beta when M1 < M2, c >= beta when M1 > M2,
// c == beta when they are equal) and the recomputed ratio must not drop:
// it rises strictly unless c == beta. Without beta every c is admitted.
bool exchange_admits(double m1, double m2, std::size_t s1, std::size_t s2, double c_bar, double c);

BlockStats block_stats(std::span<const BlockEntry> members, const GroupPartition& partition,
                       std::span<const double> eps, double phi);

// Sliding two-block window. Blocks must be pushed in index order; each push
// settles the previous block, fixing it against the new one, and hands it to
// the sink. finish() settles the last block.
class BlockWindow {
 public:
  using Sink = std::function<void(Block&& block, const BlockReport& report)>;

  BlockWindow(const Schema& schema, const GroupPartition& partition, const FairnessConfig& config,
              std::size_t block_count, Sink sink);

  void push(Block block);
  void finish();

  std::size_t skipped_blocks() const noexcept { return skipped_; }
  // Largest number of records held at once.
  std::size_t peak_entries() const noexcept { return peak_; }

 private:
  void settle();

  const Schema& schema_;
  const GroupPartition& partition_;
  FairnessConfig config_;
  std::vector<double> eps_;
  std::size_t block_count_;
  Sink sink_;

  std::optional<Block> current_;
  std::optional<BlockReport> current_report_;
  std::size_t next_index_ = 0;
  std::size_t skipped_ = 0;
  std::size_t peak_ = 0;
  bool finished_ = false;
};

// In-memory block re-ranking over `block_count` blocks.
BlockResult block_rerank(const Ranking& ranking, const Dataset& dataset,
                         std::span<const Counterfactual> counterfactuals, const GroupPartition& partition,
                         const Schema& schema, const FairnessConfig& config, std::size_t block_count);

}  // namespace fairrecourse

#endif  // FAIRRECOURSE_BLOCKRERANK_HPP_
