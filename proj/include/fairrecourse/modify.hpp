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

#ifndef FAIRRECOURSE_MODIFY_HPP_
#define FAIRRECOURSE_MODIFY_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fairrecourse/core.hpp"

namespace fairrecourse {

using CostPredicate = std::function<bool(double cost)>;

struct Modification {
  std::vector<std::size_t> attributes;  // attributes whose value changed
  std::vector<double> values;           // complete modified vector
  double cost = 0.0;
  bool fairness_met = true;
};

// True when `cost` ranks strictly ahead of `incumbent`. Relative differences
// below 1e-12 count as ties, and ties stay with the incumbent.
bool overtakes(double cost, double incumbent);

// Per-attribute number of action steps between x and x_prime (rounded away
// from x, clipped to the attribute bounds) and the direction of travel.
struct AttributeTravel {
  std::size_t attribute;
  int direction;
  std::size_t steps;
};
std::vector<AttributeTravel> travel_toward(std::span<const double> x, std::span<const double> x_prime,
                                           const Schema& schema);

// Subsets of `movable` in the order interventions are attempted: fewer
// attributes first, then lower total recourse weight, then lower-weight
// attributes first. For weights w_A < w_B < w_C this is
// A, B, C, AB, AC, BC, ABC.
std::vector<std::vector<std::size_t>> modification_order(const Schema& schema,
                                                         std::span<const std::size_t> movable);

// Grid points visited when moving the attributes of one subset toward
// x_prime, in order. Each point differs from the previous one by at most one
// action step per attribute and the last point sits at the subset's full travel.
std::vector<std::vector<double>> subset_trajectory(std::span<const double> x,
                                                   std::span<const AttributeTravel> travel,
                                                   std::span<const std::size_t> subset,
                                                   const Schema& schema);

// Searches for the least intervention on x that satisfies `rank_ok`.
//
// Subsets are tried in modification_order. Within a subset the trajectory is
// walked one grid step at a time; the first point satisfying both predicates
// is returned. If the subset's trajectory contains points satisfying rank_ok
// but none satisfying fairness_ok, the first rank_ok point is returned with
// fairness_met = false. Later subsets are only tried when the current one has
// no rank_ok point. Returns nullopt when no subset works.
std::optional<Modification> modify_toward(std::span<const double> x, std::span<const double> x_prime,
                                          const Schema& schema, double current_cost,
                                          const CostPredicate& rank_ok,
                                          const CostPredicate& fairness_ok);

// modify_toward with rank_ok = overtakes(cost, target_cost_upper).
std::optional<Modification> modify_for_rank(std::span<const double> x, std::span<const double> x_prime,
                                            const Schema& schema, double current_cost,
                                            double target_cost_upper, const CostPredicate& fairness_ok);

}  // namespace fairrecourse

#endif  // FAIRRECOURSE_MODIFY_HPP_
