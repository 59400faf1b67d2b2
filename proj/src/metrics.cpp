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

#include "dsd/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <tuple>

#include "dsd/error.hpp"

namespace dsd {

RunStats compute_stats(const std::vector<VerificationResult>& results, int gamma,
                       const SimReport* report) {
  if (results.empty()) {
    throw InvariantError("compute_stats needs at least one verification round");
  }
  if (gamma < 1) {
    throw InvariantError("compute_stats gamma must be >= 1");
  }

  double accepted_sum = 0.0;
  int decisions = 0;
  int key_decisions = 0;
  int tokens = 0;
  for (const VerificationResult& r : results) {
    accepted_sum += static_cast<double>(r.accepted_count);
    decisions += static_cast<int>(r.decisions.size());
    key_decisions += r.key_count();
    tokens += r.tokens_committed();
  }
  const double mean_accepted = accepted_sum / static_cast<double>(results.size());

  RunStats stats;
  stats.rho = mean_accepted / static_cast<double>(gamma + 1);
  stats.avg_accepted_len = mean_accepted + 1.0;
  stats.total_tokens = tokens;
  stats.sync_rounds = static_cast<int>(results.size());
  stats.key_token_fraction =
      decisions == 0 ? 0.0
                     : static_cast<double>(key_decisions) / static_cast<double>(decisions);
  if (report != nullptr && report->total_ms > 0.0) {
    stats.tokens_per_ms = static_cast<double>(stats.total_tokens) / report->total_ms;
  }
  return stats;
}

std::string format_double(double value) {
  char buf[64];
  const auto [end, ec] =
      std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 6);
  return std::string(buf, end);
}

namespace {

void append_trace_row(std::string& out, const TraceRow& r) {
  out += r.run_id;
  out += ',';
  out += std::to_string(r.round_index);
  out += ',';
  out += std::to_string(r.gamma);
  out += ',';
  out += format_double(r.tau);
  out += ',';
  out += std::to_string(r.n_nodes);
  out += ',';
  out += format_double(r.t0_ms);
  out += ',';
  out += format_double(r.t1_ms);
  out += ',';
  out += std::to_string(r.k_accepted);
  out += ',';
  out += std::to_string(r.key_count);
  out += ',';
  out += format_double(r.compute_ms);
  out += ',';
  out += format_double(r.comm_ms);
  out += ',';
  out += format_double(r.total_ms);
  out += ',';
  out += std::to_string(r.sync_rounds);
  out += '\n';
}

void append_summary_row(std::string& out, const SummaryRow& r) {
  out += r.run_id;
  out += ',';
  out += format_double(r.rho);
  out += ',';
  out += format_double(r.avg_accepted_len);
  out += ',';
  out += format_double(r.total_tokens);
  out += ',';
  out += format_double(r.sync_rounds);
  out += ',';
  out += format_double(r.tokens_per_ms);
  out += ',';
  out += format_double(r.key_token_fraction);
  out += ',';
  out += format_double(r.analytic_speedup);
  out += ',';
  out += format_double(r.measured_speedup);
  out += '\n';
}

}  // namespace

std::string render_trace_csv(std::vector<TraceRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const TraceRow& a, const TraceRow& b) {
    return std::tie(a.round_index, a.run_id) < std::tie(b.round_index, b.run_id);
  });
  std::string out = kTraceHeader;
  out += '\n';
  for (const TraceRow& r : rows) append_trace_row(out, r);
  return out;
}

std::string render_summary_csv(std::vector<SummaryRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SummaryRow& a, const SummaryRow& b) { return a.run_id < b.run_id; });
  std::string out = kSummaryHeader;
  out += '\n';
  for (const SummaryRow& r : rows) append_summary_row(out, r);
  return out;
}

void write_file(const std::string& path, const std::string& contents) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) {
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) {
      throw WriteError("cannot create directory " + p.parent_path().string() + ": " +
                       ec.message());
    }
  }
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw WriteError("cannot open " + path + " for writing");
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) {
    throw WriteError("write failed for " + path);
  }
}

}  // namespace dsd
