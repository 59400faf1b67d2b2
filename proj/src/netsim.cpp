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

#include "dsd/netsim.hpp"

#include <cmath>
#include <cstdint>
#include <queue>
#include <string>
#include <tuple>

#include "dsd/error.hpp"

namespace dsd {

LatencySampler LatencySampler::deterministic(double base_ms) {
  LatencySampler s;
  s.kind = Kind::Deterministic;
  s.base_ms = base_ms;
  s.validate();
  return s;
}

LatencySampler LatencySampler::uniform_jitter(double base_ms, double halfwidth_ms) {
  LatencySampler s;
  s.kind = Kind::UniformJitter;
  s.base_ms = base_ms;
  s.jitter_halfwidth_ms = halfwidth_ms;
  s.validate();
  return s;
}

void LatencySampler::validate() const {
  if (!std::isfinite(base_ms) || base_ms < 0.0) {
    throw InvariantError("sampler base latency must be >= 0, got " +
                         std::to_string(base_ms));
  }
  if (!std::isfinite(jitter_halfwidth_ms) || jitter_halfwidth_ms < 0.0) {
    throw InvariantError("sampler jitter halfwidth must be >= 0, got " +
                         std::to_string(jitter_halfwidth_ms));
  }
  if (kind == Kind::Deterministic && jitter_halfwidth_ms != 0.0) {
    throw InvariantError("deterministic sampler cannot carry jitter");
  }
}

double LatencySampler::sample(UniformStream& rng) const {
  if (kind == Kind::Deterministic) return base_ms;
  return base_ms + jitter_halfwidth_ms * (2.0 * rng.next_uniform() - 1.0);
}

namespace {

// Work assigned to one synchronization round of the pipeline.
struct UnitSpec {
  double compute_ms = 0.0;
  int tokens_committed = 0;
};

enum class EventKind { ComputeDone, LinkDone };

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;  // tie-break for simultaneous events
  EventKind kind = EventKind::ComputeDone;
  double duration_ms = 0.0;
  int link_index = 0;
};

// Min-queue keyed lexicographically by (time, seq): simultaneous events
// fire in schedule order, making the loop fully deterministic.
class EventQueue {
 public:
  void push(Event e) {
    e.seq = next_seq_++;
    heap_.push(e);
  }
  Event pop() {
    Event e = heap_.top();
    heap_.pop();
    return e;
  }
  bool empty() const { return heap_.empty(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

// Drives the linear pipeline: each unit computes locally, then its commit
// traverses the N-1 links one after another (pipeline depth), which is one
// synchronization round. Units are strictly sequential.
SimReport run_pipeline(const ClusterConfig& cluster, const std::vector<UnitSpec>& units,
                       const LatencySampler& sampler, UniformStream& rng) {
  cluster.validate();
  sampler.validate();

  SimReport report;
  report.traces.reserve(units.size());

  EventQueue queue;
  const int hops = cluster.n_nodes - 1;
  std::size_t unit = 0;
  double now = 0.0;
  double unit_comm = 0.0;

  auto schedule_compute = [&](std::size_t u) {
    queue.push(Event{now + units[u].compute_ms, 0, EventKind::ComputeDone,
                     units[u].compute_ms, 0});
  };
  auto schedule_link = [&](int link) {
    const double d = sampler.sample(rng);
    queue.push(Event{now + d, 0, EventKind::LinkDone, d, link});
  };
  auto commit_unit = [&]() {
    RoundTrace trace;
    trace.round_index = static_cast<int>(unit);
    trace.tokens_committed = units[unit].tokens_committed;
    trace.compute_ms = units[unit].compute_ms;
    trace.comm_ms = unit_comm;
    trace.total_ms = trace.compute_ms + trace.comm_ms;
    trace.sync_rounds = 1;
    report.traces.push_back(trace);
    report.total_tokens += trace.tokens_committed;
    report.total_sync_rounds += 1;
    unit_comm = 0.0;
    ++unit;
    if (unit < units.size()) schedule_compute(unit);
  };

  if (!units.empty()) schedule_compute(0);
  while (!queue.empty()) {
    const Event ev = queue.pop();
    now = ev.time;
    switch (ev.kind) {
      case EventKind::ComputeDone:
        if (hops == 0) {
          commit_unit();
        } else {
          schedule_link(0);
        }
        break;
      case EventKind::LinkDone:
        unit_comm += ev.duration_ms;
        if (ev.link_index == hops - 1) {
          commit_unit();
        } else {
          schedule_link(ev.link_index + 1);
        }
        break;
    }
  }
  report.total_ms = now;
  return report;
}

}  // namespace

SimReport simulate_standard(const ClusterConfig& cluster, int n_tokens,
                            const LatencySampler& sampler, UniformStream& rng) {
  if (n_tokens < 1) {
    throw InvariantError("simulate_standard needs n_tokens >= 1, got " +
                         std::to_string(n_tokens));
  }
  std::vector<UnitSpec> units(static_cast<std::size_t>(n_tokens),
                              UnitSpec{cluster.compute_step_ms, 1});
  return run_pipeline(cluster, units, sampler, rng);
}

SimReport simulate_dsd(const ClusterConfig& cluster,
                       const std::vector<VerificationResult>& rounds,
                       const LatencySampler& sampler, UniformStream& rng) {
  if (rounds.empty()) {
    throw InvariantError("simulate_dsd needs at least one verification round");
  }
  std::vector<UnitSpec> units;
  units.reserve(rounds.size());
  for (const VerificationResult& r : rounds) {
    // Verification compute scales with the accepted span; the whole round
    // then commits accepted + 1 tokens in one synchronization.
    units.push_back(UnitSpec{static_cast<double>(r.accepted_count) * cluster.compute_step_ms,
                             r.tokens_committed()});
  }
  return run_pipeline(cluster, units, sampler, rng);
}

double measured_speedup(const SimReport& standard, const SimReport& dsd) {
  if (standard.total_tokens != dsd.total_tokens) {
    throw IncomparableReportsError(
        "reports cover different token counts: " + std::to_string(standard.total_tokens) +
        " vs " + std::to_string(dsd.total_tokens));
  }
  return standard.total_ms / dsd.total_ms;
}

}  // namespace dsd
