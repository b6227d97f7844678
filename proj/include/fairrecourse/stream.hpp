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

#ifndef FAIRRECOURSE_STREAM_HPP_
#define FAIRRECOURSE_STREAM_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>

#include "fairrecourse/core.hpp"
#include "fairrecourse/io.hpp"
#include "fairrecourse/metrics.hpp"

namespace fairrecourse {

struct StreamOptions {
  // Exactly one of the two must be set.
  std::optional<std::size_t> block_count;
  std::optional<std::size_t> block_size;
  LoadOptions load;
};

struct StreamStats {
  std::size_t records = 0;
  std::size_t peak_entries = 0;  // most records held in the block window
};

// Block re-ranking of a CSV file without loading it.
//
// The first pass keeps only (cost, file offset, group) per record and sorts
// by cost; the second pass re-reads records block by block in rank order and
// feeds a two-block window. The ranking file and the returned metrics match
// the in-memory pipeline byte for byte.
MetricsReport stream_block_rerank(const std::filesystem::path& input, const Schema& schema,
                                  const FairnessConfig& config, const StreamOptions& options,
                                  const std::filesystem::path& ranking_out, StreamStats* stats = nullptr);

}  // namespace fairrecourse

#endif  // FAIRRECOURSE_STREAM_HPP_
