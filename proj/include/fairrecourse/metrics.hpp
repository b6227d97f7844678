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

#ifndef FAIRRECOURSE_METRICS_HPP_
#define FAIRRECOURSE_METRICS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fairrecourse/core.hpp"

namespace fairrecourse {

// Slack applied to every tolerance comparison so that exact boundary cases
// such as |1/3 - 1/2| <= 1/6 do not flip on rounding noise.
inline constexpr double kFairnessSlack = 1e-9;

struct FairnessConfig {
  double tau = 1.0 / 3.0;        // epsilon_j = tau * p_j
  double phi = 0.2;              // recourse-fair iff r >= 1 - phi
  std::size_t cutoff_step = 0;   // 0 selects the default for the list size

  void validate() const;
};

// Cutoff step used when none is configured: 10, or 1 for lists under 20.
std::size_t default_cutoff_step(std::size_t list_size);

// How a group with no members in the evaluated subset enters min/max.
enum class AbsentGroup {
  kSkip,      // leave it out; a subset with a single present group has r = 1
  kZeroMean,  // treat its mean cost as 0
};

// epsilon_j = tau * p_j for every group.
std::vector<double> representation_tolerance(const GroupPartition& partition, double tau);

// |count_j / total - p_j| <= eps_j for every protected group j. An empty
// subset is fair.
bool fair_representation(std::span<const std::size_t> counts, const GroupPartition& partition,
                         std::span<const double> eps);

// Length of the shortest violating prefix among lengths 2..k-1, if any.
std::optional<std::size_t> ranked_fair_representation(std::span<const std::size_t> order,
                                                      const GroupPartition& partition,
                                                      std::span<const double> eps);

// min_j M_j / max_j M_j; 1 when every considered mean is zero.
double ratio_from_means(std::span<const double> means);
double recourse_ratio(std::span<const double> cost_sums, std::span<const std::size_t> counts,
                      AbsentGroup absent = AbsentGroup::kSkip);

// Mean recourse cost per group over `members` (0 for groups without members).
std::vector<double> group_mean_costs(std::span<const std::size_t> members,
                                     std::span<const double> cost_of, const GroupPartition& partition);

double recourse_fairness_ratio(std::span<const std::size_t> members, std::span<const double> cost_of,
                               const GroupPartition& partition, AbsentGroup absent = AbsentGroup::kSkip);

// Length of the shortest prefix (lengths 2..k-1) with r < 1 - phi, if any.
std::optional<std::size_t> ranked_recourse_fairness(std::span<const std::size_t> order,
                                                    std::span<const double> cost_of,
                                                    const GroupPartition& partition, double phi);

struct RankingQuality {
  double rkl = 0.0;
  double rnd = 0.0;
  double rrd = 0.0;

  bool operator==(const RankingQuality&) const = default;
};

// Log-discounted, normalised distance between the protected share of each
// top-i prefix and the overall share, evaluated at i = step, 2*step, ... and
// at the full length. The normaliser is the same sum over the ordering that
// places every protected record last. Protected means "member of any
// protected group".
class RankingQualityAccumulator {
 public:
  RankingQualityAccumulator(std::size_t total, std::size_t total_protected, std::size_t cutoff_step);

  void push(bool is_protected);
  RankingQuality result() const;

 private:
  struct Sums {
    double kl = 0.0;
    double nd = 0.0;
    double rd = 0.0;
  };
  void add_terms(Sums& sums, std::size_t prefix, std::size_t protected_count) const;

  std::size_t total_;
  std::size_t total_protected_;
  std::size_t step_;
  std::size_t seen_ = 0;
  std::size_t protected_seen_ = 0;
  Sums actual_;
};

RankingQuality ranking_quality(std::span<const std::size_t> order, const GroupPartition& partition,
                               std::size_t cutoff_step);
double rkl(std::span<const std::size_t> order, const GroupPartition& partition, std::size_t cutoff_step);
double rnd(std::span<const std::size_t> order, const GroupPartition& partition, std::size_t cutoff_step);
double rrd(std::span<const std::size_t> order, const GroupPartition& partition, std::size_t cutoff_step);

struct FairnessReport {
  double r = 1.0;
  std::vector<double> mean_costs;
  std::vector<std::size_t> counts;
  RankingQuality quality;
  std::optional<std::size_t> first_representation_violation;
  std::size_t representation_violations = 0;
  std::optional<std::size_t> first_recourse_violation;
  std::size_t recourse_violations = 0;

  bool representation_ok() const noexcept { return !first_representation_violation; }
  bool recourse_ok() const noexcept { return !first_recourse_violation; }

  bool operator==(const FairnessReport&) const = default;
};

// Single pass over a ranked list given as (group, cost) pairs in rank order.
class RankingAuditor {
 public:
  RankingAuditor(const GroupPartition& partition, const FairnessConfig& config, std::size_t total);

  void push(std::size_t group, double cost);
  FairnessReport result() const;

 private:
  const GroupPartition& partition_;
  std::vector<double> eps_;
  double phi_;
  std::size_t total_;
  std::size_t seen_ = 0;
  std::vector<std::size_t> counts_;
  std::vector<double> sums_;
  RankingQualityAccumulator quality_;
  FairnessReport report_;
};

FairnessReport audit_ranking(std::span<const std::size_t> order, std::span<const double> cost_of,
                             const GroupPartition& partition, const FairnessConfig& config);

}  // namespace fairrecourse

#endif  // FAIRRECOURSE_METRICS_HPP_
