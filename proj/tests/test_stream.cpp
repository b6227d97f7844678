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

#include "fairrecourse/blockrerank.hpp"
#include "fairrecourse/io.hpp"
#include "fairrecourse/pipeline.hpp"
#include "fairrecourse/stream.hpp"
#include "support.hpp"

namespace fairrecourse {
namespace {

using testing::TempDir;

struct InMemory {
  MetricsReport metrics;
  std::string ranking;
};

InMemory in_memory(const std::filesystem::path& csv, const Schema& schema, const FairnessConfig& config,
                   std::size_t block_count, const std::filesystem::path& out) {
  const Prepared p = prepare(load_dataset(csv, schema), schema);
  const BlockResult r =
      block_rerank(p.ranking, p.dataset, p.counterfactuals, p.partition, schema, config, block_count);
  RankingWriter w(out, schema);
  for (const RankingRow& row : ranking_rows(p, schema, r.order, r.cost_of, r.interventions)) w.write(row);
  w.close();
  return {block_metrics(p, config, r), testing::slurp(out)};
}

class StreamMatchesMemory : public ::testing::TestWithParam<std::size_t> {};

TEST_P(StreamMatchesMemory, ByteForByte) {
  TempDir tmp;
  const auto synth = generate_synthetic({.records = 2000, .protected_share = 0.4, .shift = 0.6, .seed = GetParam()});
  write_dataset(tmp / "d.csv", synth.dataset, synth.schema);
  FairnessConfig config;
  for (std::size_t blocks : {1, 7, 40, 2000}) {
    const InMemory expected = in_memory(tmp / "d.csv", synth.schema, config, blocks, tmp / "mem.csv");
    StreamOptions options;
    options.block_count = blocks;
    StreamStats stats;
    const MetricsReport got = stream_block_rerank(tmp / "d.csv", synth.schema, config, options, tmp / "s.csv", &stats);
    EXPECT_EQ(metrics_to_json(got), metrics_to_json(expected.metrics)) << blocks;
    EXPECT_EQ(testing::slurp(tmp / "s.csv"), expected.ranking) << blocks;
    EXPECT_EQ(stats.records, 2000u);
    const std::size_t largest = block_sizes(2000, blocks).back();
    EXPECT_LE(stats.peak_entries, 2 * largest + 2);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, StreamMatchesMemory, ::testing::Values(1, 2, 3));

TEST(Stream, BlockSizeOption) {
  TempDir tmp;
  const auto synth = generate_synthetic({.records = 1000, .seed = 5});
  write_dataset(tmp / "d.csv", synth.dataset, synth.schema);
  StreamOptions options;
  options.block_size = 100;
  const MetricsReport m = stream_block_rerank(tmp / "d.csv", synth.schema, FairnessConfig{}, options, tmp / "s.csv");
  ASSERT_TRUE(m.block_summary);
  EXPECT_EQ(m.block_summary->block_count, 10u);
  EXPECT_EQ(read_ranking(tmp / "s.csv").rows.size(), 1000u);
}

TEST(Stream, RejectsBadOptionsAndInput) {
  TempDir tmp;
  const auto synth = generate_synthetic({.records = 100, .seed = 6});
  write_dataset(tmp / "d.csv", synth.dataset, synth.schema);
  StreamOptions both;
  both.block_count = 2;
  both.block_size = 50;
  EXPECT_THROW(stream_block_rerank(tmp / "d.csv", synth.schema, FairnessConfig{}, both, tmp / "s.csv"), Error);
  StreamOptions neither;
  EXPECT_THROW(stream_block_rerank(tmp / "d.csv", synth.schema, FairnessConfig{}, neither, tmp / "s.csv"), Error);
  StreamOptions many;
  many.block_count = 101;
  EXPECT_THROW(stream_block_rerank(tmp / "d.csv", synth.schema, FairnessConfig{}, many, tmp / "s.csv"), Error);

  testing::spit(tmp / "bad.csv", testing::slurp(tmp / "d.csv") + "r101,not,a,row\n");
  StreamOptions ok;
  ok.block_count = 2;
  EXPECT_THROW(stream_block_rerank(tmp / "bad.csv", synth.schema, FairnessConfig{}, ok, tmp / "s.csv"), InputError);
  ok.load.skip_bad_rows = true;
  const MetricsReport m = stream_block_rerank(tmp / "bad.csv", synth.schema, FairnessConfig{}, ok, tmp / "s.csv");
  EXPECT_EQ(m.records, 100u);
}

}  // namespace
}  // namespace fairrecourse
