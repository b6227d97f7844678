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

#include "fairrecourse/modify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fairrecourse/counterfactual.hpp"
#include "fairrecourse/text.hpp"

namespace fairrecourse {
namespace {

double cost_or_infinity(std::span<const double> values, const Schema& schema) {
  try {
    return recourse_cost(values, schema);
  } catch (const NoRecourseError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

bool overtakes(double cost, double incumbent) {
  return cost < incumbent - 1e-12 * std::max(1.0, std::abs(incumbent));
}

std::vector<AttributeTravel> travel_toward(std::span<const double> x, std::span<const double> x_prime,
                                           const Schema& schema) {
  std::vector<AttributeTravel> out;
  for (std::size_t k : schema.actionable_indices()) {
    const AttributeSpec& a = schema.attribute(k);
    const double delta = x_prime[k] - x[k];
    const double exact = std::abs(delta) / a.action_step;
    if (exact <= 1e-9) continue;
    const int direction = delta > 0 ? 1 : -1;
    double steps = std::ceil(exact - 1e-9);
    const double room = direction > 0 ? a.max - x[k] : x[k] - a.min;
    steps = std::min(steps, std::floor(room / a.action_step + 1e-9));
    if (steps < 1.0) continue;
    out.push_back({k, direction, static_cast<std::size_t>(steps)});
  }
  return out;
}

std::vector<std::vector<std::size_t>> modification_order(const Schema& schema,
                                                         std::span<const std::size_t> movable) {
  std::vector<std::size_t> by_weight(movable.begin(), movable.end());
  std::stable_sort(by_weight.begin(), by_weight.end(), [&](std::size_t a, std::size_t b) {
    return schema.weight(a) < schema.weight(b);
  });
  const std::size_t n = by_weight.size();

  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> pick;
  for (std::size_t size = 1; size <= n; ++size) {
    std::vector<std::vector<std::size_t>> level;
    pick.resize(size);
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    while (true) {
      std::vector<std::size_t> subset(size);
      for (std::size_t i = 0; i < size; ++i) subset[i] = pick[i];
      level.push_back(std::move(subset));
      std::size_t i = size;
      while (i > 0 && pick[i - 1] == n - size + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
    }
    auto weight_sum = [&](const std::vector<std::size_t>& s) {
      double w = 0.0;
      for (std::size_t r : s) w += schema.weight(by_weight[r]);
      return w;
    };
    // Positions are ranks in weight order, so lexicographic order breaks ties.
    std::stable_sort(level.begin(), level.end(), [&](const auto& a, const auto& b) {
      return weight_sum(a) < weight_sum(b);
    });
    for (auto& s : level) {
      for (std::size_t& r : s) r = by_weight[r];
      out.push_back(std::move(s));
    }
  }
  return out;
}

namespace {

// Calls visit(point) for each trajectory point until it returns false.
template <typename Visit>
void walk_trajectory(std::span<const double> x, std::span<const AttributeTravel> travel,
                     std::span<const std::size_t> subset, const Schema& schema, Visit&& visit) {
  std::vector<const AttributeTravel*> legs;
  std::size_t longest = 0;
  for (std::size_t k : subset) {
    auto it = std::find_if(travel.begin(), travel.end(),
                           [k](const AttributeTravel& t) { return t.attribute == k; });
    if (it == travel.end()) continue;
    legs.push_back(&*it);
    longest = std::max(longest, it->steps);
  }
  std::vector<double> point(x.begin(), x.end());
  for (std::size_t t = 1; t <= longest; ++t) {
    for (const AttributeTravel* leg : legs) {
      // Proportional progress along the straight segment, rounded to the grid.
      const std::size_t taken = (2 * leg->steps * t + longest) / (2 * longest);
      const double step = schema.attribute(leg->attribute).action_step;
      point[leg->attribute] =
          clean_decimal(x[leg->attribute] + leg->direction * static_cast<double>(taken) * step);
    }
    if (!visit(point)) return;
  }
}

}  // namespace

std::vector<std::vector<double>> subset_trajectory(std::span<const double> x,
                                                   std::span<const AttributeTravel> travel,
                                                   std::span<const std::size_t> subset,
                                                   const Schema& schema) {
  std::vector<std::vector<double>> points;
  walk_trajectory(x, travel, subset, schema, [&](const std::vector<double>& point) {
    points.push_back(point);
    return true;
  });
  return points;
}

std::optional<Modification> modify_toward(std::span<const double> x, std::span<const double> x_prime,
                                          const Schema& schema, double current_cost,
                                          const CostPredicate& rank_ok,
                                          const CostPredicate& fairness_ok) {
  if (rank_ok(current_cost)) {
    Modification none;
    none.values.assign(x.begin(), x.end());
    none.cost = current_cost;
    none.fairness_met = fairness_ok(current_cost);
    return none;
  }

  const std::vector<AttributeTravel> travel = travel_toward(x, x_prime, schema);
  std::vector<std::size_t> movable;
  for (const auto& t : travel) movable.push_back(t.attribute);

  auto finish = [&](std::vector<double> values, double cost, bool fair) {
    Modification m;
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (values[k] != x[k]) m.attributes.push_back(k);
    }
    m.values = std::move(values);
    m.cost = cost;
    m.fairness_met = fair;
    return m;
  };

  for (const auto& subset : modification_order(schema, movable)) {
    std::optional<std::pair<std::vector<double>, double>> fallback;
    std::optional<std::pair<std::vector<double>, double>> fair;
    walk_trajectory(x, travel, subset, schema, [&](const std::vector<double>& point) {
      const double cost = cost_or_infinity(point, schema);
      if (!std::isfinite(cost) || !rank_ok(cost)) return true;
      if (fairness_ok(cost)) {
        fair.emplace(point, cost);
        return false;
      }
      if (!fallback) fallback.emplace(point, cost);
      return true;
    });
    if (fair) return finish(std::move(fair->first), fair->second, true);
    if (fallback) return finish(std::move(fallback->first), fallback->second, false);
  }
  return std::nullopt;
}

std::optional<Modification> modify_for_rank(std::span<const double> x, std::span<const double> x_prime,
                                            const Schema& schema, double current_cost,
                                            double target_cost_upper, const CostPredicate& fairness_ok) {
  return modify_toward(
      x, x_prime, schema, current_cost,
      [target_cost_upper](double cost) { return overtakes(cost, target_cost_upper); }, fairness_ok);
}

}  // namespace fairrecourse
