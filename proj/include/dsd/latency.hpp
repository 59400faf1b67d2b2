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

namespace dsd {

/// Shape of the decentralized deployment: N pipeline shards, a fixed local
/// compute time per decoding step, and a point-to-point link latency paid
/// on each of the N-1 hops of a synchronization. All times in milliseconds.
struct ClusterConfig {
  int n_nodes = 1;
  double compute_step_ms = 1.0;  // > 0
  double link_latency_ms = 0.0;  // >= 0

  void validate() const;
};

/// Inputs of the expected-speedup formula. Means may be fractional.
struct SpeedModelInput {
  double acceptance_ratio = 1.0;   // rho = mean accepted / (gamma + 1), in (0, 1]
  double mean_accepted = 1.0;      // mean accepted tokens per round, >= 1
  int window = 8;                  // gamma, >= 1

  void validate() const;
};

/// Standard decoding: every token pays compute plus a full N-1 hop
/// synchronization. tokens * (t0 + (N-1) * t1).
double standard_decode_time_ms(double tokens, const ClusterConfig& cluster);

/// Window-amortized decoding: one synchronization covers the whole
/// accepted span. tokens * t0 + (N-1) * t1.
double dsd_round_time_ms(double tokens, const ClusterConfig& cluster);

/// Fraction of standard-decoding time eliminated by amortization:
/// (N-1) * t1 * (tokens-1) / (tokens * (t0 + (N-1) * t1)),
/// identically 1 - dsd/standard.
double comm_reduction_ratio(double tokens, const ClusterConfig& cluster);

/// Expected speedup over standard decoding:
/// (t0 + (N-1) t1) / (t0 / rho + (N-1) t1 / mean_accepted).
double expected_speedup(const SpeedModelInput& input, const ClusterConfig& cluster);

/// True in the operating region where amortization pays off most:
/// 3 <= N <= 8 (inclusive) and 3 t0 < t1 < 10 t0 (strict).
bool in_amortization_regime(const ClusterConfig& cluster);

}  // namespace dsd
