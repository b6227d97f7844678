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

#ifndef FAIRRECOURSE_TOOLS_COMMANDS_HPP_
#define FAIRRECOURSE_TOOLS_COMMANDS_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairrecourse::cli {

// Bad flag combinations or values; exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string input;
  std::string schema;
  std::string tau = "1/3";
  double phi = 0.2;
  std::size_t cutoff_step = 0;
  std::string metrics_out;
  unsigned threads = 1;
  bool skip_bad_rows = false;
  bool discretize = false;
  std::optional<std::size_t> max_changed_attributes;
};

struct RerankOptions {
  std::string ranking_out;
};

struct BlockOptions {
  std::optional<std::size_t> blocks;
  std::optional<std::size_t> block_size;
  bool stream = false;
  std::string ranking_out;
};

struct SweepOptions {
  std::string sweep_spec;
  std::string out_dir;
};

struct SynthOptions {
  std::string spec;
  std::string out;
};

// Parses "0.25" or "1/3".
double parse_fraction(const std::string& text, const std::string& flag);

int run_audit(const CommonOptions& common);
int run_rerank(const CommonOptions& common, const RerankOptions& options);
int run_rerank_block(const CommonOptions& common, const BlockOptions& options);
int run_sweep(const CommonOptions& common, const SweepOptions& options);
int run_synth(const SynthOptions& options);

}  // namespace fairrecourse::cli

#endif  // FAIRRECOURSE_TOOLS_COMMANDS_HPP_
