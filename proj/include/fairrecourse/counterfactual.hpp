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

#ifndef FAIRRECOURSE_COUNTERFACTUAL_HPP_
#define FAIRRECOURSE_COUNTERFACTUAL_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairrecourse/core.hpp"

namespace fairrecourse {

struct Counterfactual {
  std::vector<double> point;
  double cost = 0.0;
  std::vector<double> deltas;  // point - x
};

// sqrt(sum_k w_k (y_k - x_k)^2) over actionable attributes. Immutable
// attributes must agree, otherwise InfeasiblePairError is thrown.
double weighted_distance(std::span<const double> x, std::span<const double> y, const Schema& schema);

// Minimum weighted-distance member of `candidates`; ties go to the lowest index.
// Candidates that would change an immutable attribute (or more attributes than
// the schema's cap allows) are skipped. Throws NoRecourseError if none remain.
Counterfactual nearest_candidate(std::span<const double> x, const CandidateSet& candidates,
                                 const Schema& schema);

// Weighted least-squares projection of x onto a.x = t moving only the
// attributes in `active` (default: every actionable attribute):
//   x*_k = x_k + lambda * a_k / w_k,  lambda = (t - a.x) / sum_k a_k^2 / w_k.
// Throws NoRecourseError when no active attribute has a non-zero coefficient.
std::vector<double> boundary_projection(std::span<const double> x, const Hyperplane& h,
                                        const Schema& schema);
std::vector<double> boundary_projection(std::span<const double> x, const Hyperplane& h,
                                        const Schema& schema, std::span<const std::size_t> active);

// Same projection restricted to the attribute bounds: each active attribute
// follows x_k + lambda * a_k / w_k until it reaches a bound and stays there.
// Throws NoRecourseError when the boundary lies outside the bounds.
std::vector<double> bounded_boundary_projection(std::span<const double> x, const Hyperplane& h,
                                                const Schema& schema, std::span<const std::size_t> active);

// Rounds every actionable delta x*_k - x_k to a whole number of action steps.
// All floor/ceil combinations are enumerated (up to 20 attributes with two
// options) and the cheapest one on the accepted side and inside the bounds is
// returned. Wider problems round each attribute toward the accepted side.
Counterfactual discretize_to_actions(std::span<const double> x, std::span<const double> x_star,
                                     const Schema& schema, const Hyperplane& h);

// True when a.x - t lies on the accepted side of (or on) the boundary.
bool accepted(std::span<const double> x, const Hyperplane& h);

// Counterfactual of one attribute vector under the schema's target and options.
// Already accepted records get themselves as counterfactual and cost 0.
Counterfactual counterfactual_for(std::span<const double> x, const Schema& schema);

// Recourse cost of an attribute vector; same dispatch as counterfactual_for.
double recourse_cost(std::span<const double> x, const Schema& schema);

struct CounterfactualBatch {
  std::vector<std::optional<Counterfactual>> results;  // by record index
  std::vector<std::string> errors;                     // empty string when ok
  std::size_t failures = 0;
};

// Per-record counterfactuals; no-recourse failures are recorded, not thrown.
// Output is independent of `threads`.
CounterfactualBatch recourse_costs(const Dataset& dataset, const Schema& schema, unsigned threads = 1);

}  // namespace fairrecourse

#endif  // FAIRRECOURSE_COUNTERFACTUAL_HPP_
