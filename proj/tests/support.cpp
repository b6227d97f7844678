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

#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fairrecourse::testing {

Schema example_schema() {
  AttributeSpec la;
  la.name = "LA";
  la.recourse_weight = 0.5;
  la.action_step = 0.05;
  la.max = 10.0;
  AttributeSpec ld;
  ld.name = "LD";
  ld.recourse_weight = 1.0;
  ld.action_step = 1.0;
  ld.max = 30.0;
  ProtectedSpec prot;
  prot.attribute = "Gender";
  prot.value = "F+";
  Hyperplane h;
  h.coefficients = {-2.0, 1.0};
  h.threshold = 0.0;
  return Schema({la, ld}, prot, h, {}, std::string("Name")).normalized();
}

Dataset example_dataset() {
  Dataset d;
  d.records = {
      {"Abdul", {3.5, 6.0}, "M"},
      {"Bogdan", {2.0, 1.0}, "M"},
      {"Chiara", {4.0, 4.0}, "F+"},
      {"Diana", {5.0, 4.0}, "F+"},
  };
  return d;
}

std::filesystem::path data_dir() { return FAIRRECOURSE_TEST_DATA_DIR; }

std::filesystem::path cli_path() { return FAIRRECOURSE_TEST_CLI; }

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  path_ = std::filesystem::temp_directory_path() /
          ("fairrecourse-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Instance random_instance(std::mt19937_64& rng, const InstanceShape& shape) {
  static constexpr double kSteps[] = {0.01, 0.05, 0.1, 0.25, 0.5, 1.0};
  std::vector<AttributeSpec> attrs;
  Hyperplane h;
  double coefficient_sum = 0.0;
  for (std::size_t k = 0; k < shape.actionable; ++k) {
    AttributeSpec a;
    a.name = "a" + std::to_string(k);
    a.recourse_weight = uniform(rng, 0.25, 1.0);
    a.action_step = kSteps[uniform_index(rng, 0, std::size(kSteps) - 1)];
    a.min = 0.0;
    a.max = 40.0;
    attrs.push_back(a);
    const double c = uniform(rng, 0.3, 1.5);
    h.coefficients.push_back(c);
    coefficient_sum += c;
  }
  for (std::size_t k = 0; k < shape.immutable; ++k) {
    AttributeSpec a;
    a.name = "fixed" + std::to_string(k);
    a.min = 0.0;
    a.max = 100.0;
    attrs.push_back(a);
    h.coefficients.push_back(0.0);
  }
  h.threshold = 10.5 * coefficient_sum;

  ProtectedSpec prot;
  prot.attribute = "group";
  std::vector<std::string> labels;
  if (shape.groups == 2) {
    prot.value = "P";
    labels = {"N", "P"};
  } else {
    for (std::size_t g = 0; g < shape.groups; ++g) labels.push_back("g" + std::to_string(g));
    prot.groups = labels;
  }
  CounterfactualOptions options;
  options.discretize = shape.discretize;
  Schema schema = Schema(std::move(attrs), prot, h, options).normalized();

  Dataset data;
  for (std::size_t i = 0; i < shape.records; ++i) {
    Record r;
    r.id = "r" + std::to_string(i);
    std::size_t group = 0;
    if (uniform(rng, 0.0, 1.0) < shape.protected_share) {
      group = shape.groups == 2 ? 1 : uniform_index(rng, 1, shape.groups - 1);
    }
    r.protected_value = labels[group];
    const double offset = group == 0 ? 0.0 : shape.shift;
    for (std::size_t k = 0; k < shape.actionable; ++k) {
      r.values.push_back(std::round(uniform(rng, 6.0, 10.0) * 100.0 - offset * 100.0) / 100.0);
    }
    for (std::size_t k = 0; k < shape.immutable; ++k) {
      r.values.push_back(static_cast<double>(uniform_index(rng, 0, 50)));
    }
    data.records.push_back(std::move(r));
  }
  return {std::move(schema), std::move(data)};
}

double oracle_distance(std::span<const double> x, std::span<const double> y, const Schema& schema) {
  double sum = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto& w = schema.attribute(k).recourse_weight;
    if (!w) continue;
    sum += *w * (x[k] - y[k]) * (x[k] - y[k]);
  }
  return std::sqrt(sum);
}

std::optional<double> brute_force_cost(std::span<const double> x, const Schema& schema,
                                       std::size_t cell_budget) {
  const auto& h = std::get<Hyperplane>(schema.target());
  struct Axis {
    std::size_t attribute;
    long lo;
    long hi;
    double step;
  };
  std::vector<Axis> axes;
  double cells = 1.0;
  for (std::size_t k = 0; k < schema.size(); ++k) {
    const AttributeSpec& a = schema.attribute(k);
    if (!a.recourse_weight) continue;
    const long lo = -static_cast<long>(std::floor((x[k] - a.min) / a.action_step + 1e-9));
    const long hi = static_cast<long>(std::floor((a.max - x[k]) / a.action_step + 1e-9));
    axes.push_back({k, lo, hi, a.action_step});
    cells *= static_cast<double>(hi - lo + 1);
  }
  if (cells > static_cast<double>(cell_budget)) return std::nullopt;

  std::vector<double> point(x.begin(), x.end());
  std::vector<long> n(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) n[i] = axes[i].lo;
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double dot = 0.0;
    for (std::size_t i = 0; i < axes.size(); ++i) {
      point[axes[i].attribute] = x[axes[i].attribute] + static_cast<double>(n[i]) * axes[i].step;
    }
    for (std::size_t k = 0; k < point.size(); ++k) dot += h.coefficients[k] * point[k];
    const double margin = h.accepted_side * (dot - h.threshold);
    if (margin >= -1e-9 * std::max(1.0, std::abs(h.threshold))) {
      best = std::min(best, oracle_distance(x, point, schema));
    }
    std::size_t i = 0;
    while (i < axes.size() && n[i] == axes[i].hi) {
      n[i] = axes[i].lo;
      ++i;
    }
    if (i == axes.size()) break;
    ++n[i];
  }
  if (std::isinf(best)) return std::nullopt;
  return best;
}

namespace {

struct QualitySums {
  double kl = 0.0;
  double nd = 0.0;
  double rd = 0.0;
};

QualitySums quality_sums(const std::vector<bool>& order, std::size_t step) {
  const double total = static_cast<double>(order.size());
  double total_protected = 0.0;
  for (bool b : order) total_protected += b ? 1.0 : 0.0;
  const double p = total_protected / total;
  const double odds = total_protected / (total - total_protected);

  QualitySums s;
  std::vector<std::size_t> cutoffs;
  for (std::size_t i = step; i <= order.size(); i += step) cutoffs.push_back(i);
  if (cutoffs.empty() || cutoffs.back() != order.size()) cutoffs.push_back(order.size());
  for (std::size_t i : cutoffs) {
    double prot = 0.0;
    for (std::size_t j = 0; j < i; ++j) prot += order[j] ? 1.0 : 0.0;
    const double n = static_cast<double>(i);
    const double share = prot / n;
    const double z = std::log2(n + 1.0);
    s.nd += std::abs(share - p) / z;
    double kl = 0.0;
    if (share > 0.0) kl += share * std::log(share / p);
    if (share < 1.0) kl += (1.0 - share) * std::log((1.0 - share) / (1.0 - p));
    s.kl += kl / z;
    if (n - prot > 0.0) s.rd += std::abs(prot / (n - prot) - odds) / z;
  }
  return s;
}

}  // namespace

OracleQuality oracle_quality(const std::vector<bool>& protected_in_order, std::size_t step) {
  const QualitySums actual = quality_sums(protected_in_order, step);
  std::vector<bool> worst = protected_in_order;
  std::stable_partition(worst.begin(), worst.end(), [](bool b) { return !b; });
  const QualitySums z = quality_sums(worst, step);
  auto ratio = [](double a, double b) { return b > 0.0 ? std::min(a / b, 1.0) : 0.0; };
  return {ratio(actual.kl, z.kl), ratio(actual.nd, z.nd), ratio(actual.rd, z.rd)};
}

double oracle_ratio(std::span<const std::size_t> groups, std::span<const double> costs,
                    std::size_t group_count) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < group_count; ++g) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (groups[i] == g) {
        sum += costs[i];
        ++n;
      }
    }
    if (n == 0) continue;
    const double mean = sum / static_cast<double>(n);
    lo = std::min(lo, mean);
    hi = std::max(hi, mean);
  }
  if (!(hi > 0.0)) return 1.0;
  return lo / hi;
}

std::vector<std::size_t> oracle_representation_violations(std::span<const std::size_t> groups_in_order,
                                                          std::span<const double> ideal,
                                                          std::span<const std::size_t> protected_groups,
                                                          double tau) {
  std::vector<std::size_t> out;
  for (std::size_t len = 2; len < groups_in_order.size(); ++len) {
    for (std::size_t g : protected_groups) {
      std::size_t n = 0;
      for (std::size_t i = 0; i < len; ++i) n += groups_in_order[i] == g ? 1 : 0;
      const double share = static_cast<double>(n) / static_cast<double>(len);
      if (std::abs(share - ideal[g]) > tau * ideal[g] + 1e-9) {
        out.push_back(len);
        break;
      }
    }
  }
  return out;
}

double oracle_exchange_ratio(std::span<const double> group1, std::span<const double> group2, double c_bar,
                             double c) {
  double s1 = -c_bar;
  for (double v : group1) s1 += v;
  double s2 = c;
  for (double v : group2) s2 += v;
  const double m1 = s1 / static_cast<double>(group1.size() - 1);
  const double m2 = s2 / static_cast<double>(group2.size() + 1);
  return std::min(m1, m2) / std::max(m1, m2);
}

}  // namespace fairrecourse::testing
