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

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "fairrecourse/core.hpp"
#include "json.hpp"

namespace {

namespace cli = fairrecourse::cli;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInvariant = 3;

unsigned default_threads() {
  const char* env = std::getenv("RAGUEL_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  try {
    std::size_t used = 0;
    const long value = std::stol(env, &used);
    if (used != std::string(env).size() || value < 1) throw std::invalid_argument(env);
    return static_cast<unsigned>(value);
  } catch (const std::exception&) {
    throw cli::UsageError(std::string("RAGUEL_THREADS must be a positive integer, got '") + env + "'");
  }
}

void add_common(CLI::App* cmd, cli::CommonOptions& o, bool dataset_required) {
  auto* input = cmd->add_option("--input", o.input, "Dataset CSV");
  auto* schema = cmd->add_option("--schema", o.schema, "Schema JSON");
  if (dataset_required) {
    input->required();
    schema->required();
  }
  cmd->add_option("--tau", o.tau, "Representation tolerance multiplier, eps = tau * p (number or a/b)")
      ->capture_default_str();
  cmd->add_option("--phi", o.phi, "Recourse tolerance: fair when r >= 1 - phi")->capture_default_str();
  cmd->add_option("--cutoff-step", o.cutoff_step, "Cutoff step for rKL/rND/rRD (0: 10, or 1 below 20 records)")
      ->capture_default_str();
  cmd->add_option("--metrics-out", o.metrics_out, "Write metrics JSON here");
  cmd->add_option("--threads", o.threads, "Worker threads for counterfactuals (default: $RAGUEL_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--skip-bad-rows", o.skip_bad_rows, "Skip malformed rows instead of failing");
  cmd->add_flag("--discretize", o.discretize, "Round counterfactuals onto the action-step grid");
  cmd->add_option("--max-changed-attributes", o.max_changed_attributes,
                  "Cap on attributes a counterfactual may change");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recourse-aware fair ranking"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fairrecourse 0.1.0");

  cli::CommonOptions common;
  cli::RerankOptions rerank;
  cli::BlockOptions block;
  cli::SweepOptions sweep;
  cli::SynthOptions synth;
  std::size_t blocks = 0;
  std::size_t block_size = 0;

  auto* audit_cmd = app.add_subcommand("audit", "Rank by recourse cost and report fairness");
  add_common(audit_cmd, common, true);

  auto* rerank_cmd = app.add_subcommand("rerank", "Prefix re-ranking with minimal interventions");
  add_common(rerank_cmd, common, true);
  rerank_cmd->add_option("--ranking-out", rerank.ranking_out, "Write the re-ranked list here");

  auto* block_cmd = app.add_subcommand("rerank-block", "Block re-ranking");
  add_common(block_cmd, common, true);
  auto* blocks_opt = block_cmd->add_option("--blocks", blocks, "Number of blocks")->check(CLI::PositiveNumber);
  auto* size_opt = block_cmd->add_option("--block-size", block_size, "Records per block")->check(CLI::PositiveNumber);
  blocks_opt->excludes(size_opt);
  block_cmd->add_flag("--stream", block.stream, "Two-pass streaming mode with a two-block window");
  block_cmd->add_option("--ranking-out", block.ranking_out, "Write the re-ranked list here");

  auto* sweep_cmd = app.add_subcommand("sweep", "Block-count by tolerance grid");
  add_common(sweep_cmd, common, false);
  sweep_cmd->add_option("--sweep-spec", sweep.sweep_spec, "Sweep JSON")->required();
  sweep_cmd->add_option("--out-dir", sweep.out_dir, "Directory for sweep.csv")->required();

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset and schema");
  synth_cmd->add_option("--spec", synth.spec, "Synthetic spec JSON")->required();
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();

  try {
    common.threads = default_threads();
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const cli::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*audit_cmd) return cli::run_audit(common);
    if (*rerank_cmd) return cli::run_rerank(common, rerank);
    if (*block_cmd) {
      if (*blocks_opt) block.blocks = blocks;
      if (*size_opt) block.block_size = block_size;
      return cli::run_rerank_block(common, block);
    }
    if (*sweep_cmd) return cli::run_sweep(common, sweep);
    if (*synth_cmd) return cli::run_synth(synth);
  } catch (const cli::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fairrecourse::InvariantError& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const fairrecourse::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInvariant;
  }
  return kExitUsage;
}
