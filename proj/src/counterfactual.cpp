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

#include "fairrecourse/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "fairrecourse/text.hpp"

namespace fairrecourse {
namespace {

constexpr std::size_t kMaxEnumeratedAttributes = 20;

double boundary_tolerance(std::span<const double> x, const Hyperplane& h) {
  double scale = std::max(1.0, std::abs(h.threshold));
  double dot_scale = 0.0;
  for (std::size_t k = 0; k < h.coefficients.size(); ++k) {
    dot_scale += std::abs(h.coefficients[k] * x[k]);
  }
  return 1e-9 * std::max(scale, dot_scale);
}

bool same_value(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

std::size_t changed_attributes(std::span<const double> x, std::span<const double> y) {
  std::size_t n = 0;
  for (std::size_t k = 0; k < x.size(); ++k) n += same_value(x[k], y[k]) ? 0 : 1;
  return n;
}

Counterfactual make_counterfactual(std::span<const double> x, std::vector<double> point,
                                   const Schema& schema) {
  Counterfactual cf;
  cf.cost = weighted_distance(x, point, schema);
  cf.deltas.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) cf.deltas[k] = point[k] - x[k];
  cf.point = std::move(point);
  return cf;
}

// Calls fn(subset) for every subset of `items` with 1..max_size members, in
// order of size and then lexicographically.
template <typename Fn>
void for_each_subset(const std::vector<std::size_t>& items, std::size_t max_size, Fn&& fn) {
  const std::size_t n = items.size();
  std::vector<std::size_t> pick;
  for (std::size_t size = 1; size <= std::min(max_size, n); ++size) {
    pick.resize(size);
    for (std::size_t i = 0; i < size; ++i) pick[i] = i;
    while (true) {
      std::vector<std::size_t> subset(size);
      for (std::size_t i = 0; i < size; ++i) subset[i] = items[pick[i]];
      fn(subset);
      std::size_t i = size;
      while (i > 0 && pick[i - 1] == n - size + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
}

std::vector<double> project_within(std::span<const double> x, const Hyperplane& h, const Schema& schema,
                                   std::span<const std::size_t> active, std::span<const double> lo,
                                   std::span<const double> hi);
std::pair<std::vector<double>, std::vector<double>> lattice_bounds(std::span<const double> x,
                                                                   const Schema& schema);

Counterfactual hyperplane_counterfactual(std::span<const double> x, const Hyperplane& h,
                                         const Schema& schema,
                                         std::span<const std::size_t> active) {
  if (schema.options().discretize) {
    const auto [lo, hi] = lattice_bounds(x, schema);
    return discretize_to_actions(x, project_within(x, h, schema, active, lo, hi), schema, h);
  }
  return make_counterfactual(x, boundary_projection(x, h, schema, active), schema);
}

}  // namespace

double weighted_distance(std::span<const double> x, std::span<const double> y, const Schema& schema) {
  if (x.size() != schema.size() || y.size() != schema.size()) {
    throw InputError("weighted_distance: vectors must have one value per schema attribute");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = y[k] - x[k];
    if (schema.actionable(k)) {
      sum += schema.weight(k) * d * d;
    } else if (!same_value(x[k], y[k])) {
      throw InfeasiblePairError("immutable attribute '" + schema.attribute(k).name + "' differs (" +
                                format_double(x[k]) + " vs " + format_double(y[k]) + ")");
    }
  }
  return std::sqrt(sum);
}

Counterfactual nearest_candidate(std::span<const double> x, const CandidateSet& candidates,
                                 const Schema& schema) {
  if (candidates.points.empty()) throw NoRecourseError("candidate set is empty");
  const auto cap = schema.options().max_changed_attributes;
  std::size_t best = candidates.points.size();
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.points.size(); ++c) {
    const auto& point = candidates.points[c];
    bool feasible = true;
    for (std::size_t k = 0; k < x.size() && feasible; ++k) {
      feasible = schema.actionable(k) || same_value(x[k], point[k]);
    }
    if (!feasible) continue;
    if (cap && changed_attributes(x, point) > *cap) continue;
    const double cost = weighted_distance(x, point, schema);
    if (cost < best_cost) {
      best_cost = cost;
      best = c;
    }
  }
  if (best == candidates.points.size()) {
    throw NoRecourseError("no candidate counterfactual is reachable without changing an immutable attribute");
  }
  return make_counterfactual(x, candidates.points[best], schema);
}

std::vector<double> boundary_projection(std::span<const double> x, const Hyperplane& h,
                                        const Schema& schema) {
  return boundary_projection(x, h, schema, schema.actionable_indices());
}

std::vector<double> boundary_projection(std::span<const double> x, const Hyperplane& h,
                                        const Schema& schema, std::span<const std::size_t> active) {
  double dot = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) dot += h.coefficients[k] * x[k];
  double denom = 0.0;
  for (std::size_t k : active) {
    if (!schema.actionable(k)) continue;
    denom += h.coefficients[k] * h.coefficients[k] / schema.weight(k);
  }
  if (!(denom > 0.0)) {
    throw NoRecourseError("decision boundary cannot be reached through actionable attributes");
  }
  const double lambda = (h.threshold - dot) / denom;
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t k : active) {
    if (!schema.actionable(k)) continue;
    out[k] = x[k] + lambda * h.coefficients[k] / schema.weight(k);
  }
  return out;
}

namespace {

std::vector<double> project_within(std::span<const double> x, const Hyperplane& h, const Schema& schema,
                                   std::span<const std::size_t> active, std::span<const double> lo,
                                   std::span<const double> hi) {
  double dot = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) dot += h.coefficients[k] * x[k];
  const double need = h.threshold - dot;
  const double sign = need < 0.0 ? -1.0 : 1.0;

  // Attribute k moves at rate |a_k| / w_k per unit of |lambda| and stops
  // after `room` units of its own value.
  struct Mover {
    std::size_t attribute;
    double rate;
    double stop;  // |lambda| at which the bound is reached
  };
  std::vector<Mover> movers;
  for (std::size_t k : active) {
    const double a = h.coefficients[k];
    if (!schema.actionable(k) || a == 0.0) continue;
    const bool up = sign * a > 0.0;
    const double room = std::max(0.0, up ? hi[k] - x[k] : x[k] - lo[k]);
    const double rate = std::abs(a) / schema.weight(k);
    movers.push_back({k, rate, room / rate});
  }
  if (movers.empty()) throw NoRecourseError("decision boundary cannot be reached through actionable attributes");
  std::sort(movers.begin(), movers.end(), [](const Mover& l, const Mover& r) { return l.stop < r.stop; });

  // g(mu) = sum_k |a_k| * min(mu * rate_k, room_k) is piecewise linear.
  double slope = 0.0;
  for (const Mover& m : movers) slope += std::abs(h.coefficients[m.attribute]) * m.rate;
  const double target = std::abs(need);
  double mu = 0.0;
  double gained = 0.0;
  bool reached = false;
  for (const Mover& m : movers) {
    const double next = gained + slope * (m.stop - mu);
    if (next >= target) {
      mu += (target - gained) / slope;
      reached = true;
      break;
    }
    gained = next;
    mu = m.stop;
    slope -= std::abs(h.coefficients[m.attribute]) * m.rate;
  }
  if (!reached && gained < target - boundary_tolerance(x, h)) {
    throw NoRecourseError("decision boundary lies outside the attribute bounds");
  }

  std::vector<double> out(x.begin(), x.end());
  for (const Mover& m : movers) {
    const std::size_t k = m.attribute;
    out[k] = std::clamp(x[k] + sign * mu * h.coefficients[k] / schema.weight(k), lo[k], hi[k]);
  }
  return out;
}

// Bounds pulled in to the nearest points of the action lattice through x.
std::pair<std::vector<double>, std::vector<double>> lattice_bounds(std::span<const double> x,
                                                                   const Schema& schema) {
  std::vector<double> lo(x.size());
  std::vector<double> hi(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const AttributeSpec& a = schema.attribute(k);
    lo[k] = clean_decimal(x[k] - std::floor((x[k] - a.min) / a.action_step + 1e-9) * a.action_step);
    hi[k] = clean_decimal(x[k] + std::floor((a.max - x[k]) / a.action_step + 1e-9) * a.action_step);
  }
  return {std::move(lo), std::move(hi)};
}

}  // namespace

std::vector<double> bounded_boundary_projection(std::span<const double> x, const Hyperplane& h,
                                                const Schema& schema, std::span<const std::size_t> active) {
  std::vector<double> lo(x.size());
  std::vector<double> hi(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    lo[k] = schema.attribute(k).min;
    hi[k] = schema.attribute(k).max;
  }
  return project_within(x, h, schema, active, lo, hi);
}

bool accepted(std::span<const double> x, const Hyperplane& h) {
  return h.margin(x) >= -boundary_tolerance(x, h);
}

Counterfactual discretize_to_actions(std::span<const double> x, std::span<const double> x_star,
                                     const Schema& schema, const Hyperplane& h) {
  struct Options {
    std::size_t attribute;
    double lo;
    double hi;
  };
  std::vector<double> base(x.begin(), x.end());
  std::vector<Options> open;  // attributes with two distinct in-bounds roundings

  for (std::size_t k : schema.actionable_indices()) {
    const AttributeSpec& a = schema.attribute(k);
    const double steps = (x_star[k] - x[k]) / a.action_step;
    const double nearest = std::round(steps);
    auto value_at = [&](double n) { return clean_decimal(x[k] + n * a.action_step); };
    auto in_bounds = [&](double v) { return v >= a.min && v <= a.max; };
    if (std::abs(steps - nearest) <= 1e-9) {
      const double v = value_at(nearest);
      if (!in_bounds(v)) throw NoRecourseError("counterfactual for '" + a.name + "' leaves its bounds");
      base[k] = v;
      continue;
    }
    const double lo = value_at(std::floor(steps));
    const double hi = value_at(std::ceil(steps));
    const bool lo_ok = in_bounds(lo);
    const bool hi_ok = in_bounds(hi);
    if (!lo_ok && !hi_ok) throw NoRecourseError("no rounding of '" + a.name + "' stays within bounds");
    if (lo_ok && hi_ok) {
      open.push_back({k, lo, hi});
      base[k] = lo;
    } else {
      base[k] = lo_ok ? lo : hi;
    }
  }

  if (open.size() <= kMaxEnumeratedAttributes) {
    std::vector<double> point = base;
    std::vector<double> best_point;
    double best_cost = std::numeric_limits<double>::infinity();
    const std::uint64_t combos = std::uint64_t{1} << open.size();
    for (std::uint64_t mask = 0; mask < combos; ++mask) {
      for (std::size_t i = 0; i < open.size(); ++i) {
        point[open[i].attribute] = (mask >> i) & 1U ? open[i].hi : open[i].lo;
      }
      if (!accepted(point, h)) continue;
      const double cost = weighted_distance(x, point, schema);
      if (cost < best_cost) {
        best_cost = cost;
        best_point = point;
      }
    }
    if (best_point.empty()) {
      throw NoRecourseError("no action-step rounding of the counterfactual reaches the accepted side");
    }
    return make_counterfactual(x, std::move(best_point), schema);
  }

  // Wide problems: push each attribute in the direction that raises the margin.
  std::vector<double> point = base;
  for (const Options& o : open) {
    const double slope = h.accepted_side * h.coefficients[o.attribute];
    if (slope > 0.0) {
      point[o.attribute] = o.hi;
    } else if (slope < 0.0) {
      point[o.attribute] = o.lo;
    } else {
      const double target = x_star[o.attribute];
      point[o.attribute] = std::abs(o.hi - target) < std::abs(o.lo - target) ? o.hi : o.lo;
    }
  }
  if (!accepted(point, h)) {
    throw NoRecourseError("greedy action-step rounding does not reach the accepted side");
  }
  return make_counterfactual(x, std::move(point), schema);
}

Counterfactual counterfactual_for(std::span<const double> x, const Schema& schema) {
  if (x.size() != schema.size()) throw InputError("record dimension does not match the schema");
  const auto& target = schema.target();
  if (const auto* h = std::get_if<Hyperplane>(&target)) {
    if (accepted(x, *h)) return make_counterfactual(x, std::vector<double>(x.begin(), x.end()), schema);
    const auto cap = schema.options().max_changed_attributes;
    std::vector<std::size_t> relevant;
    for (std::size_t k : schema.actionable_indices()) {
      if (h->coefficients[k] != 0.0) relevant.push_back(k);
    }
    if (!cap || relevant.size() <= *cap) return hyperplane_counterfactual(x, *h, schema, relevant);

    std::optional<Counterfactual> best;
    for_each_subset(relevant, *cap, [&](const std::vector<std::size_t>& subset) {
      try {
        Counterfactual cf = hyperplane_counterfactual(x, *h, schema, subset);
        if (!best || cf.cost < best->cost) best = std::move(cf);
      } catch (const NoRecourseError&) {
      }
    });
    if (!best) throw NoRecourseError("no attribute subset within the change cap reaches the boundary");
    return std::move(*best);
  }
  if (const auto* c = std::get_if<CandidateSet>(&target)) return nearest_candidate(x, *c, schema);
  const auto& single = std::get<SinglePoint>(target);
  return nearest_candidate(x, CandidateSet{{single.point}}, schema);
}

double recourse_cost(std::span<const double> x, const Schema& schema) {
  const auto* h = std::get_if<Hyperplane>(&schema.target());
  if (!h || schema.options().discretize || x.size() != schema.size()) return counterfactual_for(x, schema).cost;
  if (accepted(x, *h)) return 0.0;
  const auto cap = schema.options().max_changed_attributes;
  std::size_t relevant = 0;
  for (std::size_t k : schema.actionable_indices()) relevant += h->coefficients[k] != 0.0;
  if (cap && relevant > *cap) return counterfactual_for(x, schema).cost;

  // Same arithmetic as projecting and then measuring, without the allocations.
  double dot = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) dot += h->coefficients[k] * x[k];
  double denom = 0.0;
  for (std::size_t k : schema.actionable_indices()) {
    if (h->coefficients[k] != 0.0) denom += h->coefficients[k] * h->coefficients[k] / schema.weight(k);
  }
  if (!(denom > 0.0)) throw NoRecourseError("decision boundary cannot be reached through actionable attributes");
  const double lambda = (h->threshold - dot) / denom;
  double sum = 0.0;
  for (std::size_t k : schema.actionable_indices()) {
    if (h->coefficients[k] == 0.0) continue;
    const double d = (x[k] + lambda * h->coefficients[k] / schema.weight(k)) - x[k];
    sum += schema.weight(k) * d * d;
  }
  return std::sqrt(sum);
}

CounterfactualBatch recourse_costs(const Dataset& dataset, const Schema& schema, unsigned threads) {
  const std::size_t n = dataset.size();
  CounterfactualBatch batch;
  batch.results.resize(n);
  batch.errors.resize(n);

  std::vector<std::exception_ptr> thrown(n ? 1 + n / 256 : 1);
  auto work = [&](std::size_t slot, std::size_t begin, std::size_t end) {
    try {
      for (std::size_t i = begin; i < end; ++i) {
        try {
          batch.results[i] = counterfactual_for(dataset.records[i].values, schema);
        } catch (const NoRecourseError& e) {
          batch.errors[i] = e.what();
        }
      }
    } catch (...) {
      thrown[slot] = std::current_exception();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, n / 256 + 1));
  if (workers == 1) {
    work(0, 0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(work, w, begin, end);
    }
  }
  for (const auto& e : thrown) {
    if (e) std::rethrow_exception(e);
  }
  for (const auto& e : batch.errors) batch.failures += e.empty() ? 0 : 1;
  return batch;
}

}  // namespace fairrecourse
