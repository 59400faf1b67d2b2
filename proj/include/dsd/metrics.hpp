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

#include <optional>
#include <string>
#include <vector>

#include "dsd/netsim.hpp"
#include "dsd/verifier.hpp"

namespace dsd {

/// Trace statistics over the rounds of one run. rho lives in [0, 1]
/// (all-reject rounds are legal and still commit their extra token).
struct RunStats {
  double rho = 0.0;                       // mean accepted / (gamma + 1)
  double avg_accepted_len = 0.0;          // mean accepted + 1, counting the extra token
  int total_tokens = 0;                   // committed tokens, extra included
  int sync_rounds = 0;
  std::optional<double> tokens_per_ms;    // set iff a timing report was supplied
  double key_token_fraction = 0.0;        // share of evaluated positions marked key
};

RunStats compute_stats(const std::vector<VerificationResult>& results, int gamma,
                       const SimReport* report = nullptr);

/// One row of the per-round trace CSV.
struct TraceRow {
  std::string run_id;
  int round_index = 0;
  int gamma = 0;
  double tau = 0.0;
  int n_nodes = 0;
  double t0_ms = 0.0;
  double t1_ms = 0.0;
  int k_accepted = 0;
  int key_count = 0;
  double compute_ms = 0.0;
  double comm_ms = 0.0;
  double total_ms = 0.0;
  int sync_rounds = 0;
};

/// One row of the per-run summary CSV. Token and round counts are doubles
/// because sweep aggregate rows carry means over seeds; integral values
/// still render as integers.
struct SummaryRow {
  std::string run_id;
  double rho = 0.0;
  double avg_accepted_len = 0.0;
  double total_tokens = 0.0;
  double sync_rounds = 0.0;
  double tokens_per_ms = 0.0;
  double key_token_fraction = 0.0;
  double analytic_speedup = 0.0;
  double measured_speedup = 0.0;
};

inline constexpr const char* kTraceHeader =
    "run_id,round_index,gamma,tau,n_nodes,t0_ms,t1_ms,k_accepted,key_count,"
    "compute_ms,comm_ms,total_ms,sync_rounds";
inline constexpr const char* kSummaryHeader =
    "run_id,rho,avg_accepted_len,total_tokens,sync_rounds,tokens_per_ms,"
    "key_token_fraction,analytic_speedup,measured_speedup";

/// Floating-point CSV cell: 6 significant digits, locale-independent.
std::string format_double(double value);

/// Renders rows in the canonical order (round_index ascending, then run_id
/// lexicographic), LF line endings, trailing newline.
std::string render_trace_csv(std::vector<TraceRow> rows);

/// Renders rows ordered by run_id lexicographic.
std::string render_summary_csv(std::vector<SummaryRow> rows);

/// Writes bytes to a file, creating parent directories. Throws WriteError
/// (message carries the path) on any I/O failure.
void write_file(const std::string& path, const std::string& contents);

}  // namespace dsd
