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

#include <vector>

#include "dsd/latency.hpp"
#include "dsd/rng.hpp"
#include "dsd/verifier.hpp"

namespace dsd {

/// Per-link traversal time model. Deterministic returns the base latency
/// exactly and never consumes randomness; uniform-jitter adds a draw from
/// U(-halfwidth, +halfwidth) per traversal.
struct LatencySampler {
  enum class Kind { Deterministic, UniformJitter };

  Kind kind = Kind::Deterministic;
  double base_ms = 0.0;
  double jitter_halfwidth_ms = 0.0;

  static LatencySampler deterministic(double base_ms);
  static LatencySampler uniform_jitter(double base_ms, double halfwidth_ms);

  void validate() const;
  double sample(UniformStream& rng) const;
};

/// Timing of one synchronization round: how long the shard pipeline spent
/// computing versus traversing links, and how many tokens the round
/// committed.
struct RoundTrace {
  int round_index = 0;
  int tokens_committed = 0;
  double compute_ms = 0.0;
  double comm_ms = 0.0;
  double total_ms = 0.0;
  int sync_rounds = 0;
};

/// Aggregate of a simulation run; totals always equal the sums over traces.
struct SimReport {
  std::vector<RoundTrace> traces;
  double total_ms = 0.0;
  int total_tokens = 0;
  int total_sync_rounds = 0;
};

/// Standard autoregressive decoding on a linear pipeline of N shards:
/// every token pays one compute interval followed by N-1 sequential link
/// traversals, i.e. one synchronization round per token.
SimReport simulate_standard(const ClusterConfig& cluster, int n_tokens,
                            const LatencySampler& sampler, UniformStream& rng);

/// Window-amortized decoding: each verification round pays its accepted
/// span's compute followed by a single synchronization of N-1 traversals,
/// committing accepted_count + 1 tokens.
SimReport simulate_dsd(const ClusterConfig& cluster,
                       const std::vector<VerificationResult>& rounds,
                       const LatencySampler& sampler, UniformStream& rng);

/// Ratio of the two totals. Throws IncomparableReportsError when the
/// reports do not cover the same number of tokens.
double measured_speedup(const SimReport& standard, const SimReport& dsd);

}  // namespace dsd
