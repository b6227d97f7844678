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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fairrecourse/pipeline.hpp"
#include "fairrecourse/rerank.hpp"
#include "support.hpp"

namespace fairrecourse {
namespace {

std::vector<std::string> ids_in_order(const Prepared& p, std::span<const std::size_t> order) {
  std::vector<std::string> out;
  for (std::size_t i : order) out.push_back(p.dataset.records[i].id);
  return out;
}

ReRankResult run(const Prepared& p, const Schema& s, const FairnessConfig& c) {
  return rerank(p.ranking, p.dataset, p.counterfactuals, p.partition, s, c);
}

TEST(Rerank, LoanExamplePromotesChiara) {
  const Schema s = testing::example_schema();
  const Prepared p = prepare(testing::example_dataset(), s);
  const auto before = ids_in_order(p, p.ranking.order);
  EXPECT_EQ(before, (std::vector<std::string>{"Abdul", "Bogdan", "Chiara", "Diana"}));

  FairnessConfig config;
  config.phi = 0.7;
  const ReRankResult r = run(p, s, config);
  EXPECT_EQ(ids_in_order(p, r.order), (std::vector<std::string>{"Abdul", "Chiara", "Bogdan", "Diana"}));
  ASSERT_EQ(r.interventions.size(), 1u);
  const Intervention& iv = r.interventions[0];
  EXPECT_EQ(p.dataset.records[iv.record].id, "Chiara");
  EXPECT_EQ(iv.attributes, (std::vector<std::size_t>{0}));
  EXPECT_EQ(iv.old_values, (std::vector<double>{4.0}));
  EXPECT_EQ(iv.new_values, (std::vector<double>{3.45}));
  EXPECT_NEAR(iv.new_cost, 0.97, 0.005);
  EXPECT_NEAR(iv.old_cost, 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(iv.distance, std::sqrt(0.5) * 0.55, 1e-12);
  EXPECT_EQ(r.exit_strategy_count, 0u);
  EXPECT_FALSE(r.exit_position);
  EXPECT_TRUE(r.recourse_unmet.empty());
  EXPECT_DOUBLE_EQ(r.avg_modification, r.total_modification / 4.0);
}

TEST(Rerank, TighterRecourseTolerancePushesTheModificationFurther) {
  const Schema s = testing::example_schema();
  const Prepared p = prepare(testing::example_dataset(), s);
  FairnessConfig config;
  config.phi = 0.05;
  const ReRankResult r = run(p, s, config);
  EXPECT_EQ(ids_in_order(p, r.order), (std::vector<std::string>{"Abdul", "Chiara", "Bogdan", "Diana"}));
  ASSERT_EQ(r.interventions.size(), 1u);
  // Chiara's cost has to come within 5% of Abdul's 1/3.
  EXPECT_EQ(r.interventions[0].new_values, (std::vector<double>{2.5}));
  EXPECT_NEAR(r.interventions[0].new_cost, 1.0 / 3.0, 1e-12);
  EXPECT_TRUE(r.recourse_unmet.empty());
}

TEST(Rerank, FairRankingIsLeftAlone) {
  const Schema s = testing::example_schema();
  Dataset d = testing::example_dataset();
  d.records[1].protected_value = "F+";  // Bogdan joins the protected group
  d.records[2].protected_value = "M";
  const Prepared p = prepare(d, s);
  const ReRankResult r = run(p, s, FairnessConfig{});
  EXPECT_EQ(r.order, p.ranking.order);
  EXPECT_TRUE(r.interventions.empty());
  EXPECT_EQ(r.total_modification, 0.0);
}

TEST(Rerank, CopiesTheRestWhenNoCandidateCanMove) {
  AttributeSpec x;
  x.name = "x";
  x.recourse_weight = 1.0;
  x.max = 10.0;
  AttributeSpec z;
  z.name = "z";
  z.max = 20.0;
  ProtectedSpec prot;
  prot.attribute = "g";
  prot.value = "P";
  Hyperplane h;
  h.coefficients = {1.0, -1.0};
  const Schema s({x, z}, prot, h);
  Dataset d;
  d.records = {{"n1", {9, 10}, "N"}, {"n2", {9, 10.5}, "N"}, {"p1", {10, 12}, "P"}, {"p2", {10, 13}, "P"}};
  const Prepared p = prepare(d, s);
  const ReRankResult r = run(p, s, FairnessConfig{});
  EXPECT_EQ(r.order, p.ranking.order);
  EXPECT_EQ(r.exit_position, 1u);
  EXPECT_EQ(r.exit_strategy_count, 3u);
  EXPECT_TRUE(r.interventions.empty());
}

TEST(Rerank, ApplyInterventionsWritesNewValues) {
  const Schema s = testing::example_schema();
  const Prepared p = prepare(testing::example_dataset(), s);
  FairnessConfig config;
  config.phi = 0.7;
  const ReRankResult r = run(p, s, config);
  const Dataset after = apply_interventions(p.dataset, r.interventions);
  EXPECT_EQ(after.records[2].values, (std::vector<double>{3.45, 4.0}));
  EXPECT_EQ(after.records[0].values, p.dataset.records[0].values);
}

struct PropertyCase {
  const char* name;
  testing::InstanceShape shape;
  double tau;
};

void PrintTo(const PropertyCase& c, std::ostream* os) { *os << c.name; }

class RerankProperties : public ::testing::TestWithParam<PropertyCase> {};

TEST_P(RerankProperties, PermutationConservationAndPrefixFairness) {
  const PropertyCase& pc = GetParam();
  std::mt19937_64 rng(std::hash<std::string>{}(pc.name));
  for (int trial = 0; trial < 25; ++trial) {
    auto shape = pc.shape;
    shape.records = testing::uniform_index(rng, 5, shape.records);
    const auto inst = testing::random_instance(rng, shape);
    const Prepared p = prepare(inst.dataset, inst.schema);
    FairnessConfig config;
    config.tau = pc.tau;
    const ReRankResult r = run(p, inst.schema, config);

    std::vector<std::size_t> sorted = r.order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) ASSERT_EQ(sorted[i], i);

    const Dataset after = apply_interventions(p.dataset, r.interventions);
    for (std::size_t i = 0; i < after.size(); ++i) {
      for (std::size_t k = 0; k < inst.schema.size(); ++k) {
        if (!inst.schema.actionable(k)) {
          ASSERT_EQ(after.records[i].values[k], p.dataset.records[i].values[k]);
        }
      }
      EXPECT_NEAR(r.cost_of[i], counterfactual_for(after.records[i].values, inst.schema).cost, 1e-9);
    }
    for (const Intervention& iv : r.interventions) {
      EXPECT_LT(iv.new_cost, iv.old_cost);
      EXPECT_NEAR(iv.distance,
                  testing::oracle_distance(p.dataset.records[iv.record].values, after.records[iv.record].values,
                                           inst.schema),
                  1e-12);
    }

    std::vector<bool> has_intervention(p.dataset.size(), false);
    for (const Intervention& iv : r.interventions) has_intervention[iv.record] = true;
    std::vector<std::size_t> prefix_groups;
    std::vector<double> prefix_costs;
    std::vector<std::size_t> unmet;
    for (std::size_t pos = 0; pos < r.order.size(); ++pos) {
      prefix_groups.push_back(p.partition.group_of[r.order[pos]]);
      prefix_costs.push_back(r.cost_of[r.order[pos]]);
      if (!has_intervention[r.order[pos]]) continue;
      const double ratio = testing::oracle_ratio(prefix_groups, prefix_costs, p.partition.group_count());
      if (ratio < 1.0 - config.phi - 1e-9) unmet.push_back(pos);
    }
    EXPECT_EQ(unmet, r.recourse_unmet);

    const std::size_t checked = r.exit_position ? *r.exit_position + 1 : r.order.size();
    std::vector<std::size_t> groups;
    for (std::size_t i = 0; i < checked; ++i) groups.push_back(p.partition.group_of[r.order[i]]);
    // Re-verify every complete prefix up to the end of the fair part.
    groups.push_back(0);
    const auto viol =
        testing::oracle_representation_violations(groups, p.partition.ideal, p.partition.protected_groups, pc.tau);
    std::vector<std::size_t> inside;
    for (std::size_t v : viol) {
      if (v < checked) inside.push_back(v);
    }
    EXPECT_TRUE(inside.empty()) << "first violating prefix " << inside.front();
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, RerankProperties,
                         ::testing::Values(PropertyCase{"two_groups", {.records = 60}, 1.0 / 3.0},
                                           PropertyCase{"tight", {.records = 60, .shift = 1.5}, 0.2},
                                           PropertyCase{"three_groups", {.records = 60, .groups = 3}, 0.5},
                                           PropertyCase{"discrete", {.records = 40, .discretize = true}, 0.5}),
                         [](const auto& info) { return std::string(info.param.name); });

}  // namespace
}  // namespace fairrecourse
