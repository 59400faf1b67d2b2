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

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dsd/config.hpp"

namespace dsd {

/// Exit codes shared by every subcommand.
struct ExitCode {
  static constexpr int kOk = 0;
  static constexpr int kRuntimeError = 1;
  static constexpr int kConfigError = 2;
  static constexpr int kInformativeDivergence = 3;
};

struct CommandOptions {
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  int workers = 1;
};

/// Seeded end-to-end experiment: generate with the verifier, replay the
/// rounds through the network simulator, time the standard baseline over
/// the same token count, and emit trace.csv + summary.csv under out_dir.
int run_command(const ExperimentConfig& config, const CommandOptions& opts,
                std::ostream& log);

/// Cartesian product of sweep values and seeds; one summary row per
/// (value, seed) plus one "-mean" aggregate row per value. Points may be
/// evaluated on several worker threads; emission order is deterministic.
int sweep_command(const ExperimentConfig& config, const CommandOptions& opts,
                  std::ostream& log);

/// Compares the exact output distribution of the speculative loop against
/// direct target enumeration on every configured instance. Returns 0 when
/// the max total variation is within 1e-9, 3 when the (relaxed) config
/// diverges — informative, not a failure of the tool.
int verify_lossless_command(const ExperimentConfig& config, const CommandOptions& opts,
                            std::ostream& log);

/// Grid-searches key-token thresholds on the config's validation items and
/// writes the full grid log as CSV.
int calibrate_command(const ExperimentConfig& config, const CommandOptions& opts,
                      std::ostream& log);

/// Inputs of the closed-form latency table.
struct AnalyticQuery {
  std::vector<int> n_nodes;
  std::vector<double> t0_ms;
  std::vector<double> t1_ms;
  std::vector<double> k_tokens;
  std::optional<double> rho;  // defaults to k / (gamma + 1) per row
  int gamma = 8;
};

/// One evaluated point of the analytic grid.
struct AnalyticRow {
  int n_nodes;
  double t0_ms;
  double t1_ms;
  double k_tokens;
  double rho;
  int gamma;
  double t_std_ms;
  double t_dsd_ms;
  double r_comm;
  double speedup;
  bool in_regime;
};

/// Grid evaluation behind the `analytic` subcommand, exposed for reuse.
std::vector<AnalyticRow> analytic_grid(const AnalyticQuery& query);

/// Prints the analytic table; optionally also writes analytic.csv.
int analytic_command(const AnalyticQuery& query,
                     const std::optional<std::string>& out_dir, std::ostream& log);

}  // namespace dsd
