/* Copyright 2026 The dsdlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsd/commands.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config (JSON)")
      ->required();
  cmd->add_option("--out", args.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--seed", args.seed, "override the config's seed list with one seed");
  cmd->add_option("--workers", args.workers, "worker threads for sweep points")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

dsd::CommandOptions to_options(const CommonArgs& args) {
  dsd::CommandOptions opts;
  opts.out_dir = args.out_dir;
  opts.seed_override = args.seed;
  opts.workers = args.workers;
  return opts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale lab for decentralized speculative decoding"};
  app.require_subcommand(1);

  CommonArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "seeded end-to-end experiment");
  add_common(run_cmd, run_args);

  CommonArgs sweep_args;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "repeat the experiment across one axis");
  add_common(sweep_cmd, sweep_args);

  CommonArgs lossless_args;
  CLI::App* lossless_cmd = app.add_subcommand(
      "verify-lossless", "compare the exact speculative output distribution "
                         "against direct target enumeration");
  add_common(lossless_cmd, lossless_args);

  CommonArgs calibrate_args;
  CLI::App* calibrate_cmd =
      app.add_subcommand("calibrate", "grid-search key-token thresholds");
  add_common(calibrate_cmd, calibrate_args);

  dsd::AnalyticQuery query;
  std::optional<std::string> analytic_out;
  CLI::App* analytic_cmd =
      app.add_subcommand("analytic", "closed-form latency model table");
  analytic_cmd->add_option("--n-nodes", query.n_nodes, "node counts")->required();
  analytic_cmd->add_option("--t0", query.t0_ms, "compute times per step (ms)")->required();
  analytic_cmd->add_option("--t1", query.t1_ms, "link latencies (ms)")->required();
  analytic_cmd->add_option("--k", query.k_tokens, "accepted tokens per round")->required();
  analytic_cmd->add_option("--rho", query.rho,
                           "acceptance ratio (default: k / (gamma + 1))");
  analytic_cmd->add_option("--gamma", query.gamma, "draft window length")
      ->capture_default_str();
  analytic_cmd->add_option("--out", analytic_out, "directory for analytic.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      return dsd::run_command(dsd::load_config(run_args.config_path),
                              to_options(run_args), std::cout);
    }
    if (sweep_cmd->parsed()) {
      return dsd::sweep_command(dsd::load_config(sweep_args.config_path),
                                to_options(sweep_args), std::cout);
    }
    if (lossless_cmd->parsed()) {
      return dsd::verify_lossless_command(dsd::load_config(lossless_args.config_path),
                                          to_options(lossless_args), std::cout);
    }
    if (calibrate_cmd->parsed()) {
      return dsd::calibrate_command(dsd::load_config(calibrate_args.config_path),
                                    to_options(calibrate_args), std::cout);
    }
    if (analytic_cmd->parsed()) {
      return dsd::analytic_command(query, analytic_out, std::cout);
    }
  } catch (const dsd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return dsd::ExitCode::kConfigError;
  } catch (const dsd::EnumerationTooLargeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return dsd::ExitCode::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dsd::ExitCode::kRuntimeError;
  }
  return dsd::ExitCode::kRuntimeError;
}
