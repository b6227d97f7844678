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

#ifndef FAIRRECOURSE_CORE_HPP_
#define FAIRRECOURSE_CORE_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fairrecourse {

// Error hierarchy. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class NoRecourseError : public Error {
 public:
  using Error::Error;
};

class InfeasiblePairError : public Error {
 public:
  using Error::Error;
};

class StreamError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Raised when an internal consistency check fails at runtime.
class InvariantError : public Error {
 public:
  using Error::Error;
};

enum class AttributeKind { kNumeric, kBinary };

struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::kNumeric;
  // Empty means the attribute is immutable and never leaves its recorded value.
  std::optional<double> recourse_weight;
  // Feasible interventions move the attribute by whole multiples of this.
  double action_step = 1.0;
  double min = 0.0;
  double max = 1.0;

  bool immutable() const noexcept { return !recourse_weight.has_value(); }
};

// Linear classifier f(x) = sign(a.x - t). A record x is accepted when
// accepted_side * (a.x - t) >= 0; points on the boundary count as accepted.
struct Hyperplane {
  std::vector<double> coefficients;
  double threshold = 0.0;
  int accepted_side = 1;

  // Signed distance-like quantity, non-negative on the accepted side.
  double margin(std::span<const double> x) const;
};

struct CandidateSet {
  std::vector<std::vector<double>> points;
};

struct SinglePoint {
  std::vector<double> point;
};

using CounterfactualTarget = std::variant<Hyperplane, CandidateSet, SinglePoint>;

// Declares how records are assigned to sub-groups.
//
// Two-group form: `value` is set; records whose protected attribute equals it
// form the protected group (index 1) and every other record is group 0.
//
// n-group form: `groups` lists one label per group (index = position), and
// `protected_groups` names the audited groups. When `protected_groups` is empty
// every group but the first is audited.
struct ProtectedSpec {
  std::string attribute;
  std::optional<std::string> value;
  std::vector<std::string> groups;
  std::vector<std::string> protected_groups;
};

struct CounterfactualOptions {
  // Round boundary projections onto the action-step grid.
  bool discretize = false;
  // Upper bound on the number of attributes a counterfactual may change.
  std::optional<std::size_t> max_changed_attributes;
};

class Schema {
 public:
  Schema(std::vector<AttributeSpec> attributes, ProtectedSpec protected_spec,
         CounterfactualTarget target, CounterfactualOptions options = {},
         std::optional<std::string> id_column = std::nullopt);

  std::size_t size() const noexcept { return attributes_.size(); }
  const std::vector<AttributeSpec>& attributes() const noexcept { return attributes_; }
  const AttributeSpec& attribute(std::size_t k) const { return attributes_.at(k); }
  std::optional<std::size_t> index_of(std::string_view name) const;

  // Weight of attribute k; zero for immutable attributes.
  double weight(std::size_t k) const noexcept { return weights_[k]; }
  std::span<const double> weights() const noexcept { return weights_; }
  bool actionable(std::size_t k) const noexcept { return weights_[k] > 0.0; }
  const std::vector<std::size_t>& actionable_indices() const noexcept { return actionable_; }

  const ProtectedSpec& protected_spec() const noexcept { return protected_; }
  const CounterfactualTarget& target() const noexcept { return target_; }
  const CounterfactualOptions& options() const noexcept { return options_; }
  const std::optional<std::string>& id_column() const noexcept { return id_column_; }

  // Index of the protected attribute among the schema attributes, if the
  // protected column is itself a modelled attribute.
  std::optional<std::size_t> protected_attribute_index() const noexcept { return protected_index_; }

  std::size_t group_count() const noexcept { return group_labels_.size(); }
  const std::vector<std::string>& group_labels() const noexcept { return group_labels_; }
  const std::vector<std::size_t>& protected_groups() const noexcept { return protected_groups_; }

  // Sub-group of a raw protected value (throws SchemaError for unknown labels).
  std::size_t group_of_value(std::string_view value) const;
  std::size_t group_of_number(double value) const;

  // Copy with weights rescaled so the largest actionable weight is 1.
  Schema normalized() const;

  // Copy with a different counterfactual target or options.
  Schema with_target(CounterfactualTarget target) const;
  Schema with_options(CounterfactualOptions options) const;

 private:
  void validate_and_index();

  std::vector<AttributeSpec> attributes_;
  ProtectedSpec protected_;
  CounterfactualTarget target_;
  CounterfactualOptions options_;
  std::optional<std::string> id_column_;

  std::vector<double> weights_;
  std::vector<std::size_t> actionable_;
  std::optional<std::size_t> protected_index_;
  std::vector<std::string> group_labels_;
  std::vector<std::size_t> protected_groups_;
};

struct Record {
  std::string id;
  std::vector<double> values;
  // Raw text of the protected column as read from the input.
  std::string protected_value;
};

struct Dataset {
  std::vector<Record> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
};

// Throws InputError when the record does not fit the schema.
void validate_record(const Record& record, const Schema& schema);

// Sub-group index of a single record.
std::size_t group_of(const Record& record, const Schema& schema);

struct GroupPartition {
  std::vector<std::size_t> group_of;  // by record index
  std::vector<std::size_t> sizes;
  std::vector<double> ideal;  // |S_j| / D
  std::vector<std::size_t> protected_groups;
  std::vector<std::string> labels;

  std::size_t group_count() const noexcept { return sizes.size(); }
  std::size_t records() const noexcept { return group_of.size(); }
  std::size_t primary_protected() const { return protected_groups.front(); }
  // Ideal proportion of the primary protected group.
  double p() const { return ideal.at(primary_protected()); }
  bool is_protected(std::size_t group) const;
};

GroupPartition partition(const Dataset& dataset, const Schema& schema);

// Builds a partition from explicit assignments; ideal proportions are
// computed over all records.
GroupPartition make_partition(std::vector<std::size_t> group_of, std::size_t group_count,
                              std::vector<std::size_t> protected_groups,
                              std::vector<std::string> labels = {});

struct Ranking {
  std::vector<std::size_t> order;  // record indices, ascending cost
  std::vector<double> cost_of;     // by record index

  std::size_t size() const noexcept { return order.size(); }
};

// Stable ascending sort of record indices by cost.
Ranking rank_by_cost(std::span<const double> costs);

}  // namespace fairrecourse

#endif  // FAIRRECOURSE_CORE_HPP_
