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

#include "fairrecourse/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "fairrecourse/text.hpp"

namespace fairrecourse {

double Hyperplane::margin(std::span<const double> x) const {
  double dot = 0.0;
  for (std::size_t k = 0; k < coefficients.size(); ++k) dot += coefficients[k] * x[k];
  return accepted_side * (dot - threshold);
}

Schema::Schema(std::vector<AttributeSpec> attributes, ProtectedSpec protected_spec,
               CounterfactualTarget target, CounterfactualOptions options,
               std::optional<std::string> id_column)
    : attributes_(std::move(attributes)),
      protected_(std::move(protected_spec)),
      target_(std::move(target)),
      options_(options),
      id_column_(std::move(id_column)) {
  validate_and_index();
}

void Schema::validate_and_index() {
  if (attributes_.empty()) throw SchemaError("schema declares no attributes");

  std::unordered_set<std::string> names;
  weights_.assign(attributes_.size(), 0.0);
  actionable_.clear();
  for (std::size_t k = 0; k < attributes_.size(); ++k) {
    const AttributeSpec& a = attributes_[k];
    if (a.name.empty()) throw SchemaError("attribute " + std::to_string(k) + " has no name");
    if (!names.insert(a.name).second) throw SchemaError("duplicate attribute name '" + a.name + "'");
    if (!(a.action_step > 0.0) || !std::isfinite(a.action_step)) {
      throw SchemaError("attribute '" + a.name + "': action_step must be positive");
    }
    if (!(a.min <= a.max)) throw SchemaError("attribute '" + a.name + "': min must not exceed max");
    if (a.kind == AttributeKind::kBinary &&
        (a.action_step != 1.0 || a.min != 0.0 || a.max != 1.0)) {
      throw SchemaError("attribute '" + a.name + "': binary attributes use step 1 and bounds [0,1]");
    }
    if (a.recourse_weight) {
      const double w = *a.recourse_weight;
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw SchemaError("attribute '" + a.name + "': recourse weight must be positive");
      }
      weights_[k] = w;
      actionable_.push_back(k);
    }
  }

  if (protected_.attribute.empty()) throw SchemaError("missing protected attribute declaration");
  if (id_column_ && *id_column_ == protected_.attribute) {
    throw SchemaError("id column and protected attribute must differ");
  }
  protected_index_ = index_of(protected_.attribute);

  group_labels_.clear();
  protected_groups_.clear();
  if (protected_.value) {
    if (!protected_.groups.empty()) {
      throw SchemaError("protected declaration must use either 'value' or 'groups', not both");
    }
    group_labels_ = {"not " + *protected_.value, *protected_.value};
    protected_groups_ = {1};
  } else {
    if (protected_.groups.size() < 2) {
      throw SchemaError("protected declaration needs a 'value' or at least two 'groups'");
    }
    std::unordered_set<std::string> seen;
    for (const auto& g : protected_.groups) {
      if (!seen.insert(g).second) throw SchemaError("duplicate protected group label '" + g + "'");
    }
    group_labels_ = protected_.groups;
    if (protected_.protected_groups.empty()) {
      for (std::size_t j = 1; j < group_labels_.size(); ++j) protected_groups_.push_back(j);
    } else {
      for (const auto& label : protected_.protected_groups) {
        auto it = std::find(group_labels_.begin(), group_labels_.end(), label);
        if (it == group_labels_.end()) {
          throw SchemaError("protected group '" + label + "' is not a declared group");
        }
        protected_groups_.push_back(static_cast<std::size_t>(it - group_labels_.begin()));
      }
      std::sort(protected_groups_.begin(), protected_groups_.end());
      protected_groups_.erase(std::unique(protected_groups_.begin(), protected_groups_.end()),
                              protected_groups_.end());
    }
  }

  const std::size_t m = attributes_.size();
  if (const auto* h = std::get_if<Hyperplane>(&target_)) {
    if (h->coefficients.size() != m) {
      throw SchemaError("hyperplane has " + std::to_string(h->coefficients.size()) +
                        " coefficients, schema has " + std::to_string(m) + " attributes");
    }
    if (h->accepted_side != 1 && h->accepted_side != -1) {
      throw SchemaError("hyperplane accepted_side must be +1 or -1");
    }
    bool reachable = false;
    for (std::size_t k : actionable_) reachable |= h->coefficients[k] != 0.0;
    if (!reachable) throw SchemaError("hyperplane coefficients are zero over every actionable attribute");
  } else if (const auto* c = std::get_if<CandidateSet>(&target_)) {
    if (c->points.empty()) throw SchemaError("candidate set is empty");
    for (const auto& p : c->points) {
      if (p.size() != m) throw SchemaError("candidate point has wrong dimension");
    }
  } else {
    const auto& s = std::get<SinglePoint>(target_);
    if (s.point.size() != m) throw SchemaError("target point has wrong dimension");
  }
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
  for (std::size_t k = 0; k < attributes_.size(); ++k) {
    if (attributes_[k].name == name) return k;
  }
  return std::nullopt;
}

std::size_t Schema::group_of_value(std::string_view value) const {
  if (protected_index_) {
    const auto number = parse_double(value);
    if (!number) throw SchemaError("protected value '" + std::string(value) + "' is not numeric");
    return group_of_number(*number);
  }
  if (protected_.value) return value == *protected_.value ? 1 : 0;
  for (std::size_t j = 0; j < group_labels_.size(); ++j) {
    if (group_labels_[j] == value) return j;
  }
  throw SchemaError("protected value '" + std::string(value) + "' matches no declared group");
}

std::size_t Schema::group_of_number(double value) const {
  if (protected_.value) {
    const auto target = parse_double(*protected_.value);
    if (!target) throw SchemaError("protected value '" + *protected_.value + "' is not numeric");
    return value == *target ? 1 : 0;
  }
  for (std::size_t j = 0; j < group_labels_.size(); ++j) {
    const auto label = parse_double(group_labels_[j]);
    if (label && *label == value) return j;
  }
  throw SchemaError("protected value " + format_double(value) + " matches no declared group");
}

Schema Schema::normalized() const {
  double max_weight = 0.0;
  for (std::size_t k : actionable_) max_weight = std::max(max_weight, weights_[k]);
  std::vector<AttributeSpec> attrs = attributes_;
  for (auto& a : attrs) {
    if (a.recourse_weight) a.recourse_weight = *a.recourse_weight / max_weight;
  }
  return Schema(std::move(attrs), protected_, target_, options_, id_column_);
}

Schema Schema::with_target(CounterfactualTarget target) const {
  return Schema(attributes_, protected_, std::move(target), options_, id_column_);
}

Schema Schema::with_options(CounterfactualOptions options) const {
  return Schema(attributes_, protected_, target_, options, id_column_);
}

void validate_record(const Record& record, const Schema& schema) {
  if (record.values.size() != schema.size()) {
    throw InputError("record '" + record.id + "' has " + std::to_string(record.values.size()) +
                     " values, schema has " + std::to_string(schema.size()));
  }
  for (std::size_t k = 0; k < schema.size(); ++k) {
    const AttributeSpec& a = schema.attribute(k);
    const double v = record.values[k];
    if (!std::isfinite(v)) {
      throw InputError("record '" + record.id + "': attribute '" + a.name + "' is not finite");
    }
    if (v < a.min || v > a.max) {
      throw InputError("record '" + record.id + "': attribute '" + a.name + "' value " +
                       format_double(v) + " outside [" + format_double(a.min) + ", " +
                       format_double(a.max) + "]");
    }
    if (a.kind == AttributeKind::kBinary && v != 0.0 && v != 1.0) {
      throw InputError("record '" + record.id + "': binary attribute '" + a.name + "' must be 0 or 1");
    }
  }
}

std::size_t group_of(const Record& record, const Schema& schema) {
  if (const auto k = schema.protected_attribute_index()) {
    return schema.group_of_number(record.values.at(*k));
  }
  if (record.protected_value.empty()) {
    throw SchemaError("record '" + record.id + "' has no value for protected attribute '" +
                      schema.protected_spec().attribute + "'");
  }
  return schema.group_of_value(record.protected_value);
}

bool GroupPartition::is_protected(std::size_t group) const {
  return std::find(protected_groups.begin(), protected_groups.end(), group) !=
         protected_groups.end();
}

GroupPartition make_partition(std::vector<std::size_t> group_of, std::size_t group_count,
                              std::vector<std::size_t> protected_groups,
                              std::vector<std::string> labels) {
  if (group_count < 2) throw InputError("a partition needs at least two groups");
  if (protected_groups.empty()) throw InputError("a partition needs a protected group");
  GroupPartition out;
  out.sizes.assign(group_count, 0);
  for (std::size_t g : group_of) {
    if (g >= group_count) throw InputError("group index out of range");
    ++out.sizes[g];
  }
  for (std::size_t g : protected_groups) {
    if (g >= group_count) throw InputError("protected group index out of range");
  }
  const double total = static_cast<double>(group_of.size());
  out.ideal.resize(group_count);
  for (std::size_t j = 0; j < group_count; ++j) {
    out.ideal[j] = total > 0 ? static_cast<double>(out.sizes[j]) / total : 0.0;
  }
  if (labels.empty()) {
    for (std::size_t j = 0; j < group_count; ++j) labels.push_back(std::to_string(j));
  }
  out.group_of = std::move(group_of);
  out.protected_groups = std::move(protected_groups);
  out.labels = std::move(labels);
  return out;
}

GroupPartition partition(const Dataset& dataset, const Schema& schema) {
  std::vector<std::size_t> groups;
  groups.reserve(dataset.size());
  for (const Record& r : dataset.records) groups.push_back(group_of(r, schema));
  return make_partition(std::move(groups), schema.group_count(), schema.protected_groups(),
                        schema.group_labels());
}

Ranking rank_by_cost(std::span<const double> costs) {
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (!std::isfinite(costs[i]) || costs[i] < 0.0) {
      throw InputError("cost of record " + std::to_string(i) + " must be finite and non-negative");
    }
  }
  Ranking ranking;
  ranking.order.resize(costs.size());
  std::iota(ranking.order.begin(), ranking.order.end(), std::size_t{0});
  std::stable_sort(ranking.order.begin(), ranking.order.end(),
                   [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });
  ranking.cost_of.assign(costs.begin(), costs.end());
  return ranking;
}

}  // namespace fairrecourse
