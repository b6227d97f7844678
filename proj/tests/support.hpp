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

#ifndef FAIRRECOURSE_TESTS_SUPPORT_HPP_
#define FAIRRECOURSE_TESTS_SUPPORT_HPP_

// Independent oracles and instance generators shared by the unit and
// acceptance tests. Nothing here calls the library code it is used to check.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fairrecourse/core.hpp"

namespace fairrecourse::testing {

// ---- Fixtures ---------------------------------------------------------------

// The four-applicant loan example: boundary LD - 2*LA = 0, weights (0.5, 1).
Schema example_schema();
Dataset example_dataset();
std::filesystem::path data_dir();
std::filesystem::path cli_path();

// Fresh directory below the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& path);
void spit(const std::filesystem::path& path, const std::string& text);

// ---- Random instances -------------------------------------------------------

struct Instance {
  Schema schema;
  Dataset dataset;
};

struct InstanceShape {
  std::size_t records = 40;
  std::size_t actionable = 3;
  std::size_t immutable = 1;
  std::size_t groups = 2;
  double protected_share = 0.4;
  double shift = 0.5;     // extra distance from the boundary for protected records
  bool discretize = false;
};

// Hyperplane instance where every record is rejected and can reach the
// boundary inside its bounds.
Instance random_instance(std::mt19937_64& rng, const InstanceShape& shape);

double uniform(std::mt19937_64& rng, double lo, double hi);
std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi);  // inclusive

// ---- Oracles ----------------------------------------------------------------

// sqrt(sum_k w_k d_k^2) written out from the definition.
double oracle_distance(std::span<const double> x, std::span<const double> y, const Schema& schema);

// Cheapest accepted point on the action-step lattice through x, inside the
// bounds. Returns nullopt when the lattice would exceed `cell_budget` points
// or no lattice point is accepted.
std::optional<double> brute_force_cost(std::span<const double> x, const Schema& schema,
                                       std::size_t cell_budget = 2'000'000);

struct OracleQuality {
  double rkl = 0.0;
  double rnd = 0.0;
  double rrd = 0.0;
};

// Prefix-share distances at i = step, 2*step, ..., D (D always included),
// normalised by the same sums for the protected-last ordering.
OracleQuality oracle_quality(const std::vector<bool>& protected_in_order, std::size_t step);

// min/max of per-group means; groups without members are skipped.
double oracle_ratio(std::span<const std::size_t> groups, std::span<const double> costs,
                    std::size_t group_count);

// Positions (1-based prefix lengths in [2, D-1]) whose protected shares
// violate |share - p_j| <= tau * p_j. Everything is recounted per prefix.
std::vector<std::size_t> oracle_representation_violations(std::span<const std::size_t> groups_in_order,
                                                          std::span<const double> ideal,
                                                          std::span<const std::size_t> protected_groups,
                                                          double tau);

// Two-group block ratio after removing c_bar from group 1 and adding c to group 2.
double oracle_exchange_ratio(std::span<const double> group1, std::span<const double> group2, double c_bar,
                             double c);

}  // namespace fairrecourse::testing

#endif  // FAIRRECOURSE_TESTS_SUPPORT_HPP_
