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
#include <cmath>
#include <random>

#include "fairrecourse/io.hpp"
#include "fairrecourse/pipeline.hpp"
#include "support.hpp"

namespace fairrecourse {
namespace {

using testing::TempDir;

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

const char* const kSchema = R"({
  "id_column": "Name",
  "attributes": [
    {"name": "LA", "kind": "numeric", "weight": 0.5, "step": 0.05, "min": 0, "max": 10},
    {"name": "LD", "kind": "numeric", "weight": 1, "step": 1, "min": 0, "max": 30},
    {"name": "Age", "kind": "numeric", "weight": "immutable", "min": 18, "max": 99}
  ],
  "protected": {"attribute": "Gender", "value": "F+"},
  "target": {"type": "hyperplane", "coefficients": {"LA": -2, "LD": 1}, "threshold": 0, "accepted_side": 1}
})";

TEST(SchemaFile, ParsesAndNormalizes) {
  const Schema s = parse_schema(kSchema);
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s.id_column(), "Name");
  EXPECT_DOUBLE_EQ(s.weight(0), 0.5);
  EXPECT_TRUE(s.attribute(2).immutable());
  const auto& h = std::get<Hyperplane>(s.target());
  EXPECT_EQ(h.coefficients, (std::vector<double>{-2, 1, 0}));
  EXPECT_FALSE(s.options().discretize);
}

TEST(SchemaFile, RoundTripsThroughJson) {
  const Schema s = parse_schema(kSchema);
  const Schema again = parse_schema(schema_to_json(s));
  EXPECT_EQ(schema_to_json(again), schema_to_json(s));
  EXPECT_EQ(again.attribute(0).action_step, 0.05);
  EXPECT_EQ(again.protected_spec().value, "F+");

  const Schema synth = generate_synthetic({.records = 10}).schema;
  EXPECT_EQ(schema_to_json(parse_schema(schema_to_json(synth))), schema_to_json(synth));
}

TEST(SchemaFile, ErrorsNameTheJsonPath) {
  std::string text = kSchema;
  text.replace(text.find("\"weight\": 0.5"), 13, "\"weight\": -1");
  EXPECT_NE(error_of([&] { parse_schema(text); }).find("$.attributes[0].weight"), std::string::npos);

  std::string unknown = kSchema;
  unknown.replace(unknown.find("\"threshold\""), 11, "\"treshold\"");
  const auto msg = error_of([&] { parse_schema(unknown); });
  EXPECT_NE(msg.find("$.target.treshold"), std::string::npos) << msg;

  EXPECT_THROW(parse_schema(R"({"attributes": []})"), SchemaError);
}

TEST(SchemaFile, MalformedJsonReportsLineAndColumn) {
  const auto msg = error_of([] { parse_schema("{\n  \"attributes\": [,\n}", "bad.json"); });
  EXPECT_EQ(msg.rfind("bad.json:2:", 0), 0u) << msg;
  EXPECT_NE(msg.find("malformed JSON"), std::string::npos);
}

TEST(SchemaFile, CandidateAndPointTargets) {
  const char* text = R"({
    "attributes": [{"name": "x", "weight": 1, "step": 1, "min": 0, "max": 9}],
    "protected": {"attribute": "g", "groups": ["a", "b", "c"], "protected_groups": ["c"]},
    "target": {"type": "candidates", "points": [[1], [5]]}
  })";
  const Schema s = parse_schema(text);
  EXPECT_EQ(std::get<CandidateSet>(s.target()).points.size(), 2u);
  EXPECT_EQ(s.protected_groups(), (std::vector<std::size_t>{2}));
  const char* point = R"({
    "attributes": [{"name": "x", "weight": 1, "step": 1, "min": 0, "max": 9}],
    "protected": {"attribute": "g", "value": "b"},
    "target": {"type": "point", "point": {"x": 4}}
  })";
  EXPECT_EQ(std::get<SinglePoint>(parse_schema(point).target()).point, (std::vector<double>{4}));
}

TEST(Csv, SplitsQuotedFields) {
  EXPECT_EQ(split_csv_line("a,b,,c"), (std::vector<std::string>{"a", "b", "", "c"}));
  EXPECT_EQ(split_csv_line(R"("x,y","say ""hi""",z)"), (std::vector<std::string>{"x,y", "say \"hi\"", "z"}));
  EXPECT_THROW(split_csv_line("\"open"), InputError);
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("q\"q"), "\"q\"\"q\"");
  for (std::string s : {"a,b", "q\"q", " lead", "plain"}) EXPECT_EQ(split_csv_line(csv_field(s))[0], s);
}

TEST(Csv, ParsesTheExampleFile) {
  const Schema s = load_schema(testing::data_dir() / "example1" / "schema.json");
  const Dataset d = load_dataset(testing::data_dir() / "example1" / "applicants.csv", s);
  ASSERT_EQ(d.size(), 4u);
  EXPECT_EQ(d.records[2].id, "Chiara");
  EXPECT_EQ(d.records[2].protected_value, "F+");
  EXPECT_EQ(d.records[0].values, (std::vector<double>{3.5, 6.0}));
}

TEST(Csv, RowErrorsCarryLineNumbers) {
  const Schema s = testing::example_schema();
  const std::string text = "Name,Gender,LA,LD\nA,M,1,2\nB,M,x,2\nC,M,11,2\nD,M,1\n\nE,F+,2,2\n";
  const auto msg = error_of([&] { parse_dataset(text, s); });
  EXPECT_NE(msg.find("line 3: attribute 'LA': 'x' is not a number"), std::string::npos) << msg;

  LoadReport report;
  const Dataset d = parse_dataset(text, s, {.skip_bad_rows = true}, &report);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.records[1].id, "E");
  ASSERT_EQ(report.skipped.size(), 3u);
  EXPECT_NE(report.skipped[1].find("line 4"), std::string::npos);
  EXPECT_NE(report.skipped[1].find("outside [0, 10]"), std::string::npos);
  EXPECT_NE(report.skipped[2].find("expected 4 fields, found 3"), std::string::npos);
}

TEST(Csv, HeaderProblems) {
  const Schema s = testing::example_schema();
  EXPECT_THROW(parse_dataset("", s), InputError);
  EXPECT_THROW(parse_dataset("Name,Gender,LA,LD\n", s), InputError);
  EXPECT_THROW(parse_dataset("Name,Gender,LA\nA,M,1\n", s), InputError);
  EXPECT_THROW(parse_dataset("Name,LA,LD\nA,1,2\n", s), SchemaError);
  EXPECT_THROW(parse_dataset("Name,Gender,LA,LA,LD\nA,M,1,1,2\n", s), InputError);
}

TEST(Csv, DefaultIdsAreDataRowNumbers) {
  AttributeSpec x;
  x.name = "x";
  x.recourse_weight = 1.0;
  x.max = 10.0;
  ProtectedSpec p;
  p.attribute = "g";
  p.value = "1";
  Hyperplane h;
  h.coefficients = {1.0};
  h.threshold = 10.0;
  const Schema s({x}, p, h);
  const Dataset d = parse_dataset("g,x\n0,1\n1,2\n", s);
  EXPECT_EQ(d.records[0].id, "1");
  EXPECT_EQ(d.records[1].id, "2");
}

TEST(Csv, DatasetRoundTrip) {
  TempDir tmp;
  const auto synth = generate_synthetic({.records = 50, .attributes = 3, .seed = 4});
  write_dataset(tmp / "d.csv", synth.dataset, synth.schema);
  const Dataset back = load_dataset(tmp / "d.csv", synth.schema);
  ASSERT_EQ(back.size(), synth.dataset.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back.records[i].id, synth.dataset.records[i].id);
    EXPECT_EQ(back.records[i].values, synth.dataset.records[i].values);
    EXPECT_EQ(back.records[i].protected_value, synth.dataset.records[i].protected_value);
  }
}

TEST(Csv, FileReaderReReadsByOffset) {
  TempDir tmp;
  testing::spit(tmp / "f.csv", "a,b\r\n1,2\r\n\r\n3,4\n5,6");
  CsvFile f(tmp / "f.csv");
  EXPECT_EQ(f.header(), (std::vector<std::string>{"a", "b"}));
  std::string line;
  std::uint64_t offset = 0;
  std::size_t number = 0;
  std::vector<std::uint64_t> offsets;
  std::vector<std::string> lines;
  while (f.next(line, offset, number)) {
    offsets.push_back(offset);
    lines.push_back(line);
  }
  EXPECT_EQ(lines, (std::vector<std::string>{"1,2", "3,4", "5,6"}));
  EXPECT_EQ(f.read_at(offsets[2]), "5,6");
  EXPECT_EQ(f.read_at(offsets[0]), "1,2");
  EXPECT_THROW(CsvFile(tmp / "missing.csv"), IoError);
}

TEST(RankingFile, WriterAndReaderAgree) {
  TempDir tmp;
  const Schema s = testing::example_schema();
  RankingRow row;
  row.new_rank = 1;
  row.orig_rank = 3;
  row.id = "Chi,ara";
  row.group = "F+";
  row.orig_cost = 4.0 / 3.0;
  row.new_cost = 0.9666666666666665;
  row.modified = true;
  row.modified_attrs = {"LA", "LD"};
  row.values = {3.45, 4.0};
  RankingRow plain = row;
  plain.new_rank = 2;
  plain.modified = false;
  plain.modified_attrs.clear();
  {
    RankingWriter w(tmp / "r.csv", s);
    w.write(row);
    w.write(plain);
    w.close();
  }
  const RankingTable t = read_ranking(tmp / "r.csv");
  EXPECT_EQ(t.attributes, (std::vector<std::string>{"LA", "LD"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0], row);
  EXPECT_EQ(t.rows[1], plain);
  const std::string text = testing::slurp(tmp / "r.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "new_rank,orig_rank,id,group,orig_cost,new_cost,modified,modified_attrs,LA,LD");
}

TEST(MetricsFile, RoundTrip) {
  const Schema s = testing::example_schema();
  const Prepared p = prepare(testing::example_dataset(), s);
  FairnessConfig config;
  config.phi = 0.7;
  const BlockResult r = block_rerank(p.ranking, p.dataset, p.counterfactuals, p.partition, s, config, 2);
  MetricsReport m = block_metrics(p, config, r);
  m.excluded = {"ghost"};
  const MetricsReport back = metrics_from_json(metrics_to_json(m));
  EXPECT_EQ(back, m);
  ASSERT_TRUE(back.block_summary);
  // Both blocks start single-group; one swap fixes the two of them.
  EXPECT_EQ(back.block_summary->unfair_before, 2u);
  EXPECT_EQ(back.block_summary->unfair_after, 0u);
  EXPECT_EQ(back.block_summary->blocks_fixed, 2u);
  EXPECT_THROW(metrics_from_json("{}"), InputError);
  TempDir tmp;
  write_metrics(tmp / "m.json", m);
  EXPECT_EQ(read_metrics(tmp / "m.json"), m);
}

TEST(Synthetic, DeterministicPerSeed) {
  const SyntheticSpec spec{.records = 300, .attributes = 5, .protected_share = 0.25, .seed = 7};
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  ASSERT_EQ(a.dataset.size(), 300u);
  for (std::size_t i = 0; i < a.dataset.size(); ++i) EXPECT_EQ(a.dataset.records[i].values, b.dataset.records[i].values);
  std::size_t prot = 0;
  for (const Record& r : a.dataset.records) prot += r.protected_value == "1" ? 1 : 0;
  EXPECT_EQ(prot, 75u);
  SyntheticSpec other = spec;
  other.seed = 8;
  EXPECT_NE(generate_synthetic(other).dataset.records[0].values, a.dataset.records[0].values);
  EXPECT_EQ(a.schema.size(), 6u);
  EXPECT_TRUE(a.schema.attribute(5).immutable());
}

TEST(Synthetic, EveryRecordNeedsRecourse) {
  const auto d = generate_synthetic({.records = 500, .shift = 1.0, .seed = 3});
  const Prepared p = prepare(d.dataset, d.schema);
  EXPECT_TRUE(p.excluded.empty());
  for (double c : p.ranking.cost_of) EXPECT_GT(c, 0.0);
  // Protected records sit further from the boundary.
  const FairnessReport rep = audit_ranking(p.ranking.order, p.ranking.cost_of, p.partition, FairnessConfig{});
  EXPECT_GT(rep.mean_costs[1], rep.mean_costs[0]);
}

TEST(Synthetic, SpecParsingAndValidation) {
  const SyntheticSpec s = parse_synthetic_spec(R"({"records": 20, "shift": 0.5, "seed": 9, "skew": 2})");
  EXPECT_EQ(s.records, 20u);
  EXPECT_EQ(s.shift, 0.5);
  EXPECT_EQ(s.seed, 9u);
  EXPECT_EQ(s.skew, 2.0);
  EXPECT_THROW(parse_synthetic_spec(R"({"records": 1})"), SchemaError);
  EXPECT_THROW(parse_synthetic_spec(R"({"rows": 10})"), SchemaError);
  EXPECT_THROW(parse_synthetic_spec(R"({"protected_share": 1.0})"), SchemaError);
  EXPECT_THROW(parse_synthetic_spec(R"({"records": -3})"), SchemaError);

  const SyntheticSpec j = parse_synthetic_spec(R"({"shift_jitter": 0.5, "correlation": 0.25})");
  EXPECT_EQ(j.shift_jitter, 0.5);
  EXPECT_EQ(j.correlation, 0.25);
  EXPECT_THROW(parse_synthetic_spec(R"({"correlation": 1.5})"), SchemaError);
  EXPECT_THROW(parse_synthetic_spec(R"({"shift_jitter": -0.1})"), SchemaError);
  // The largest shift would push protected records past the lower bound.
  EXPECT_THROW(parse_synthetic_spec(R"({"base": 4, "spread": 4, "shift": 1.5, "shift_jitter": 0.5})"),
               SchemaError);
}

TEST(Synthetic, CorrelationTiesAttributesTogether) {
  auto sample_corr = [](double c) {
    const auto d = generate_synthetic({.records = 4000, .attributes = 2, .protected_share = 0.01,
                                       .shift = 0.0, .correlation = c, .seed = 5});
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    const double n = static_cast<double>(d.dataset.size());
    for (const Record& r : d.dataset.records) {
      const double x = r.values[0], y = r.values[1];
      sx += x, sy += y, sxx += x * x, syy += y * y, sxy += x * y;
    }
    const double cov = sxy / n - sx * sy / (n * n);
    return cov / std::sqrt((sxx / n - sx * sx / (n * n)) * (syy / n - sy * sy / (n * n)));
  };
  EXPECT_LT(std::abs(sample_corr(0.0)), 0.06);
  EXPECT_GT(sample_corr(0.8), 0.8);
}

TEST(Synthetic, JitterSpreadsTheProtectedShift) {
  auto protected_spread = [](double jitter) {
    const auto d = generate_synthetic({.records = 2000, .attributes = 1, .protected_share = 0.5, .shift = 1.0,
                                       .shift_jitter = jitter, .spread = 1e-6, .seed = 9});
    double lo = 1e9, hi = -1e9;
    for (const Record& r : d.dataset.records) {
      if (r.protected_value != "1") continue;
      lo = std::min(lo, r.values[0]);
      hi = std::max(hi, r.values[0]);
    }
    return hi - lo;
  };
  EXPECT_NEAR(protected_spread(0.0), 0.0, 1e-12);
  const double spread = protected_spread(0.5);
  EXPECT_GT(spread, 0.9);
  EXPECT_LE(spread, 1.01 + 1e-9);
}

}  // namespace
}  // namespace fairrecourse
