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

#include "fairrecourse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fairrecourse {
namespace {

std::size_t protected_total(const GroupPartition& partition) {
  std::size_t n = 0;
  for (std::size_t g : partition.protected_groups) n += partition.sizes.at(g);
  return n;
}

double kl_term(double p, double q) {
  if (p <= 0.0) return 0.0;
  return p * std::log(p / q);
}

}  // namespace

void FairnessConfig::validate() const {
  if (!(tau > 0.0 && tau <= 1.0)) throw InputError("tau must lie in (0, 1]");
  if (!(phi >= 0.0 && phi < 1.0)) throw InputError("phi must lie in [0, 1)");
}

std::size_t default_cutoff_step(std::size_t list_size) { return list_size < 20 ? 1 : 10; }

std::vector<double> representation_tolerance(const GroupPartition& partition, double tau) {
  std::vector<double> eps(partition.group_count());
  for (std::size_t j = 0; j < eps.size(); ++j) eps[j] = tau * partition.ideal[j];
  return eps;
}

bool fair_representation(std::span<const std::size_t> counts, const GroupPartition& partition,
                         std::span<const double> eps) {
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  if (total == 0) return true;
  for (std::size_t g : partition.protected_groups) {
    const double share = static_cast<double>(counts[g]) / static_cast<double>(total);
    if (std::abs(share - partition.ideal[g]) > eps[g] + kFairnessSlack) return false;
  }
  return true;
}

std::optional<std::size_t> ranked_fair_representation(std::span<const std::size_t> order,
                                                      const GroupPartition& partition,
                                                      std::span<const double> eps) {
  std::vector<std::size_t> counts(partition.group_count(), 0);
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    ++counts[partition.group_of[order[i]]];
    const std::size_t length = i + 1;
    if (length >= 2 && !fair_representation(counts, partition, eps)) return length;
  }
  return std::nullopt;
}

double ratio_from_means(std::span<const double> means) {
  if (means.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  if (*hi <= 0.0) return 1.0;
  return *lo / *hi;
}

double recourse_ratio(std::span<const double> cost_sums, std::span<const std::size_t> counts,
                      AbsentGroup absent) {
  std::vector<double> means;
  means.reserve(counts.size());
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] == 0) {
      if (absent == AbsentGroup::kZeroMean) means.push_back(0.0);
      continue;
    }
    means.push_back(cost_sums[j] / static_cast<double>(counts[j]));
  }
  return ratio_from_means(means);
}

std::vector<double> group_mean_costs(std::span<const std::size_t> members,
                                     std::span<const double> cost_of, const GroupPartition& partition) {
  std::vector<double> sums(partition.group_count(), 0.0);
  std::vector<std::size_t> counts(partition.group_count(), 0);
  for (std::size_t id : members) {
    const std::size_t g = partition.group_of[id];
    sums[g] += cost_of[id];
    ++counts[g];
  }
  for (std::size_t j = 0; j < sums.size(); ++j) {
    sums[j] = counts[j] ? sums[j] / static_cast<double>(counts[j]) : 0.0;
  }
  return sums;
}

double recourse_fairness_ratio(std::span<const std::size_t> members, std::span<const double> cost_of,
                               const GroupPartition& partition, AbsentGroup absent) {
  std::vector<double> sums(partition.group_count(), 0.0);
  std::vector<std::size_t> counts(partition.group_count(), 0);
  for (std::size_t id : members) {
    const std::size_t g = partition.group_of[id];
    sums[g] += cost_of[id];
    ++counts[g];
  }
  return recourse_ratio(sums, counts, absent);
}

std::optional<std::size_t> ranked_recourse_fairness(std::span<const std::size_t> order,
                                                    std::span<const double> cost_of,
                                                    const GroupPartition& partition, double phi) {
  std::vector<double> sums(partition.group_count(), 0.0);
  std::vector<std::size_t> counts(partition.group_count(), 0);
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const std::size_t g = partition.group_of[order[i]];
    sums[g] += cost_of[order[i]];
    ++counts[g];
    const std::size_t length = i + 1;
    if (length >= 2 && recourse_ratio(sums, counts) < 1.0 - phi - kFairnessSlack) return length;
  }
  return std::nullopt;
}

RankingQualityAccumulator::RankingQualityAccumulator(std::size_t total, std::size_t total_protected,
                                                     std::size_t cutoff_step)
    : total_(total), total_protected_(total_protected), step_(cutoff_step) {
  if (step_ == 0) step_ = default_cutoff_step(total);
  if (total_ > 0 && total_ < step_) throw InputError("ranking is shorter than the cutoff step");
  if (total_protected_ > total_) throw InputError("more protected records than records");
}

void RankingQualityAccumulator::add_terms(Sums& sums, std::size_t prefix,
                                          std::size_t protected_count) const {
  const double n = static_cast<double>(prefix);
  const double discount = 1.0 / std::log2(n + 1.0);
  const double share = static_cast<double>(protected_count) / n;
  const double overall = static_cast<double>(total_protected_) / static_cast<double>(total_);

  sums.nd += discount * std::abs(share - overall);
  sums.kl += discount * (kl_term(share, overall) + kl_term(1.0 - share, 1.0 - overall));

  const std::size_t others = prefix - protected_count;
  const std::size_t total_others = total_ - total_protected_;
  if (others > 0 && total_others > 0) {
    const double ratio = static_cast<double>(protected_count) / static_cast<double>(others);
    const double overall_ratio =
        static_cast<double>(total_protected_) / static_cast<double>(total_others);
    sums.rd += discount * std::abs(ratio - overall_ratio);
  }
}

void RankingQualityAccumulator::push(bool is_protected) {
  if (seen_ == total_) throw InputError("more records pushed than declared");
  ++seen_;
  protected_seen_ += is_protected ? 1 : 0;
  if (seen_ % step_ == 0 || seen_ == total_) add_terms(actual_, seen_, protected_seen_);
}

RankingQuality RankingQualityAccumulator::result() const {
  if (seen_ != total_) throw InputError("ranking quality requested before every record was pushed");
  Sums worst;
  const std::size_t others = total_ - total_protected_;
  for (std::size_t i = step_; i <= total_; i += step_) {
    add_terms(worst, i, i > others ? i - others : 0);
  }
  if (total_ % step_ != 0) add_terms(worst, total_, total_protected_);

  auto normalise = [](double value, double z) {
    if (!(z > 0.0)) return 0.0;
    return std::clamp(value / z, 0.0, 1.0);
  };
  return {normalise(actual_.kl, worst.kl), normalise(actual_.nd, worst.nd),
          normalise(actual_.rd, worst.rd)};
}

RankingQuality ranking_quality(std::span<const std::size_t> order, const GroupPartition& partition,
                               std::size_t cutoff_step) {
  std::size_t total_protected = 0;
  for (std::size_t id : order) total_protected += partition.is_protected(partition.group_of[id]) ? 1 : 0;
  RankingQualityAccumulator acc(order.size(), total_protected, cutoff_step);
  for (std::size_t id : order) acc.push(partition.is_protected(partition.group_of[id]));
  return acc.result();
}

double rkl(std::span<const std::size_t> order, const GroupPartition& partition, std::size_t cutoff_step) {
  return ranking_quality(order, partition, cutoff_step).rkl;
}

double rnd(std::span<const std::size_t> order, const GroupPartition& partition, std::size_t cutoff_step) {
  return ranking_quality(order, partition, cutoff_step).rnd;
}

double rrd(std::span<const std::size_t> order, const GroupPartition& partition, std::size_t cutoff_step) {
  return ranking_quality(order, partition, cutoff_step).rrd;
}

RankingAuditor::RankingAuditor(const GroupPartition& partition, const FairnessConfig& config,
                               std::size_t total)
    : partition_(partition),
      eps_(representation_tolerance(partition, config.tau)),
      phi_(config.phi),
      total_(total),
      counts_(partition.group_count(), 0),
      sums_(partition.group_count(), 0.0),
      quality_(total, protected_total(partition), config.cutoff_step) {}

void RankingAuditor::push(std::size_t group, double cost) {
  ++seen_;
  ++counts_[group];
  sums_[group] += cost;
  quality_.push(partition_.is_protected(group));
  if (seen_ >= 2 && seen_ < total_) {
    if (!fair_representation(counts_, partition_, eps_)) {
      ++report_.representation_violations;
      if (!report_.first_representation_violation) report_.first_representation_violation = seen_;
    }
    if (recourse_ratio(sums_, counts_) < 1.0 - phi_ - kFairnessSlack) {
      ++report_.recourse_violations;
      if (!report_.first_recourse_violation) report_.first_recourse_violation = seen_;
    }
  }
}

FairnessReport RankingAuditor::result() const {
  FairnessReport out = report_;
  out.counts = counts_;
  out.mean_costs.resize(counts_.size());
  for (std::size_t j = 0; j < counts_.size(); ++j) {
    out.mean_costs[j] = counts_[j] ? sums_[j] / static_cast<double>(counts_[j]) : 0.0;
  }
  out.r = recourse_ratio(sums_, counts_);
  out.quality = quality_.result();
  return out;
}

FairnessReport audit_ranking(std::span<const std::size_t> order, std::span<const double> cost_of,
                             const GroupPartition& partition, const FairnessConfig& config) {
  RankingAuditor auditor(partition, config, order.size());
  for (std::size_t id : order) auditor.push(partition.group_of[id], cost_of[id]);
  return auditor.result();
}

}  // namespace fairrecourse
