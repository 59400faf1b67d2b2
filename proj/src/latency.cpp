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

#include "dsd/latency.hpp"

#include <cmath>
#include <string>

#include "dsd/error.hpp"

namespace dsd {

void ClusterConfig::validate() const {
  if (n_nodes < 1) {
    throw InvariantError("cluster.n_nodes must be >= 1, got " + std::to_string(n_nodes));
  }
  if (!std::isfinite(compute_step_ms) || compute_step_ms <= 0.0) {
    throw InvariantError("cluster.t0_ms must be > 0, got " +
                         std::to_string(compute_step_ms));
  }
  if (!std::isfinite(link_latency_ms) || link_latency_ms < 0.0) {
    throw InvariantError("cluster.t1_ms must be >= 0, got " +
                         std::to_string(link_latency_ms));
  }
}

void SpeedModelInput::validate() const {
  if (!std::isfinite(acceptance_ratio) || acceptance_ratio <= 0.0 ||
      acceptance_ratio > 1.0) {
    throw InvariantError("speed model rho must lie in (0, 1], got " +
                         std::to_string(acceptance_ratio));
  }
  if (!std::isfinite(mean_accepted) || mean_accepted < 1.0) {
    throw InvariantError("speed model mean accepted tokens must be >= 1, got " +
                         std::to_string(mean_accepted));
  }
  if (window < 1) {
    throw InvariantError("speed model window must be >= 1, got " +
                         std::to_string(window));
  }
}

namespace {

void check_tokens(double tokens) {
  if (!std::isfinite(tokens) || tokens < 1.0) {
    throw InvariantError("token count must be >= 1, got " + std::to_string(tokens));
  }
}

double sync_cost(const ClusterConfig& c) {
  return static_cast<double>(c.n_nodes - 1) * c.link_latency_ms;
}

}  // namespace

double standard_decode_time_ms(double tokens, const ClusterConfig& cluster) {
  cluster.validate();
  check_tokens(tokens);
  return tokens * (cluster.compute_step_ms + sync_cost(cluster));
}

double dsd_round_time_ms(double tokens, const ClusterConfig& cluster) {
  cluster.validate();
  check_tokens(tokens);
  return tokens * cluster.compute_step_ms + sync_cost(cluster);
}

double comm_reduction_ratio(double tokens, const ClusterConfig& cluster) {
  cluster.validate();
  check_tokens(tokens);
  return sync_cost(cluster) * (tokens - 1.0) /
         (tokens * (cluster.compute_step_ms + sync_cost(cluster)));
}

double expected_speedup(const SpeedModelInput& input, const ClusterConfig& cluster) {
  input.validate();
  cluster.validate();
  return (cluster.compute_step_ms + sync_cost(cluster)) /
         (cluster.compute_step_ms / input.acceptance_ratio +
          sync_cost(cluster) / input.mean_accepted);
}

bool in_amortization_regime(const ClusterConfig& cluster) {
  cluster.validate();
  const bool node_range = cluster.n_nodes >= 3 && cluster.n_nodes <= 8;
  const bool latency_range = cluster.link_latency_ms > 3.0 * cluster.compute_step_ms &&
                             cluster.link_latency_ms < 10.0 * cluster.compute_step_ms;
  return node_range && latency_range;
}

}  // namespace dsd
