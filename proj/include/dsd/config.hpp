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
#include <string>
#include <vector>

#include "dsd/calibrate.hpp"
#include "dsd/latency.hpp"
#include "dsd/netsim.hpp"
#include "dsd/token_model.hpp"
#include "dsd/verifier.hpp"

namespace dsd {

/// Malformed or invalid experiment config. Parse errors carry line/column,
/// semantic errors carry the offending field path.
struct ConfigError : Error {
  using Error::Error;
};

/// Request to repeat the experiment across one parameter axis.
struct SweepSpec {
  enum class Parameter { Tau, NNodes, LinkLatency, Gamma };
  Parameter parameter = Parameter::Tau;
  std::vector<double> values;
};

/// Inputs of the `calibrate` subcommand.
struct CalibrationSpec {
  double budget = 0.05;
  ThresholdGrid grid = ThresholdGrid::defaults();
  std::vector<ValidationItem> items;
  int gamma = 4;
};

/// Fully validated experiment description, one JSON file.
struct ExperimentConfig {
  int vocab_size;
  TokenModel draft;
  TokenModel target;
  Context prompt;
  VerifyParams params;
  ClusterConfig cluster;
  LatencySampler sampler;
  // Set when the sampler base was defaulted from the cluster link latency,
  // so link-latency sweeps keep the simulator consistent.
  bool sampler_tracks_link_latency = false;
  int max_new;
  std::vector<std::uint64_t> seeds;
  std::optional<SweepSpec> sweep;
  int horizon;
  std::optional<CalibrationSpec> calibration;
};

/// Parses and validates a config from JSON text. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& json_text);

/// Reads the file and parses it. Parse failures report line and column.
ExperimentConfig load_config(const std::string& path);

/// Copy of the config with one sweep value applied to its parameter.
ExperimentConfig with_sweep_value(ExperimentConfig config, double value);

const char* sweep_parameter_name(SweepSpec::Parameter p);

}  // namespace dsd
