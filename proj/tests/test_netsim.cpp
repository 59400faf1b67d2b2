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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dsd/error.hpp"
#include "dsd/netsim.hpp"

using namespace dsd;

namespace {

VerificationResult synthetic_round(int accepted) {
  VerificationResult r;
  r.accepted_count = accepted;
  for (int i = 0; i < accepted; ++i) {
    TokenDecision d;
    d.accepted = true;
    r.decisions.push_back(d);
  }
  return r;
}

std::vector<VerificationResult> constant_rounds(int accepted, int n_rounds) {
  return std::vector<VerificationResult>(static_cast<std::size_t>(n_rounds),
                                         synthetic_round(accepted));
}

}  // namespace

TEST_CASE("standard simulation matches the closed form on the reference point") {
  const ClusterConfig c{4, 1.0, 5.0};
  SeededStream rng(1);
  const SimReport rep = simulate_standard(c, 4, LatencySampler::deterministic(5.0), rng);
  CHECK(rep.total_ms == doctest::Approx(64.0).epsilon(1e-12));
  double comm = 0.0;
  for (const RoundTrace& t : rep.traces) comm += t.comm_ms;
  CHECK(comm == doctest::Approx(60.0).epsilon(1e-12));
  CHECK(rep.total_sync_rounds == 4);
  CHECK(rep.total_tokens == 4);
}

TEST_CASE("single node pays compute only but still syncs per token") {
  const ClusterConfig c{1, 2.0, 0.0};
  SeededStream rng(2);
  const SimReport rep = simulate_standard(c, 6, LatencySampler::deterministic(0.0), rng);
  CHECK(rep.total_ms == doctest::Approx(12.0));
  CHECK(rep.total_sync_rounds == 6);
  for (const RoundTrace& t : rep.traces) CHECK(t.comm_ms == 0.0);
}

TEST_CASE("dsd simulation matches the closed form per round") {
  const ClusterConfig c{4, 1.0, 5.0};
  SeededStream rng(3);
  const SimReport rep =
      simulate_dsd(c, constant_rounds(4, 1), LatencySampler::deterministic(5.0), rng);
  CHECK(rep.total_ms == doctest::Approx(19.0).epsilon(1e-12));
  CHECK(rep.total_sync_rounds == 1);
  CHECK(rep.total_tokens == 5);  // 4 accepted + 1 extra
}

TEST_CASE("deterministic exactness across a parameter grid") {
  for (int n : {1, 2, 3, 4, 8, 16}) {
    for (int k : {1, 2, 5, 8}) {
      for (double t0 : {0.5, 1.0, 2.0}) {
        for (double t1 : {0.0, 1.0, 5.0, 20.0}) {
          const ClusterConfig c{n, t0, t1};
          const LatencySampler s = LatencySampler::deterministic(t1);
          SeededStream rng(7);

          const int tokens = 5;
          const SimReport std_rep = simulate_standard(c, tokens, s, rng);
          CHECK(std::abs(std_rep.total_ms - standard_decode_time_ms(tokens, c)) <= 1e-9);
          CHECK(std_rep.total_sync_rounds == tokens);

          const int rounds = 3;
          const SimReport dsd_rep = simulate_dsd(c, constant_rounds(k, rounds), s, rng);
          CHECK(std::abs(dsd_rep.total_ms - rounds * dsd_round_time_ms(k, c)) <= 1e-9);
          CHECK(dsd_rep.total_sync_rounds == rounds);
        }
      }
    }
  }
}

TEST_CASE("k=1 rounds degenerate to the standard per-token cost") {
  const ClusterConfig c{4, 1.0, 5.0};
  SeededStream rng(4);
  const int rounds = 6;
  const SimReport rep =
      simulate_dsd(c, constant_rounds(1, rounds), LatencySampler::deterministic(5.0), rng);
  CHECK(rep.total_ms == doctest::Approx(rounds * standard_decode_time_ms(1.0, c)));
}

TEST_CASE("all-reject rounds still commit their extra token") {
  const ClusterConfig c{3, 1.0, 2.0};
  SeededStream rng(5);
  const SimReport rep =
      simulate_dsd(c, constant_rounds(0, 4), LatencySampler::deterministic(2.0), rng);
  CHECK(rep.total_tokens == 4);
  for (const RoundTrace& t : rep.traces) {
    CHECK(t.tokens_committed == 1);
    CHECK(t.compute_ms == 0.0);
    CHECK(t.total_ms == doctest::Approx(4.0));
  }
}

TEST_CASE("report totals equal the sums over traces") {
  const ClusterConfig c{5, 1.5, 3.0};
  SeededStream rng(6);
  const SimReport rep = simulate_dsd(c, {synthetic_round(2), synthetic_round(0),
                                         synthetic_round(4)},
                                     LatencySampler::uniform_jitter(3.0, 0.5), rng);
  double total = 0.0;
  int tokens = 0;
  int syncs = 0;
  for (const RoundTrace& t : rep.traces) {
    CHECK(t.total_ms == doctest::Approx(t.compute_ms + t.comm_ms).epsilon(1e-12));
    total += t.total_ms;
    tokens += t.tokens_committed;
    syncs += t.sync_rounds;
  }
  CHECK(rep.total_ms == doctest::Approx(total).epsilon(1e-12));
  CHECK(rep.total_tokens == tokens);
  CHECK(rep.total_sync_rounds == syncs);
}

TEST_CASE("jittered link times average out to the base latency") {
  const ClusterConfig c{2, 1.0, 5.0};
  SeededStream rng(2025);
  const int tokens = 10000;
  const SimReport rep =
      simulate_standard(c, tokens, LatencySampler::uniform_jitter(5.0, 1.0), rng);
  double comm = 0.0;
  for (const RoundTrace& t : rep.traces) comm += t.comm_ms;
  CHECK(comm / tokens == doctest::Approx(5.0).epsilon(0.01));  // 5 +/- 0.05
}

TEST_CASE("jittered totals converge to the deterministic total") {
  const ClusterConfig c{4, 1.0, 5.0};
  const int tokens = 500;
  SeededStream det_rng(1);
  const double det_total =
      simulate_standard(c, tokens, LatencySampler::deterministic(5.0), det_rng).total_ms;
  double previous_gap = 1e30;
  for (double half : {1.0, 0.1, 0.01}) {
    SeededStream rng(99);
    const double total =
        simulate_standard(c, tokens, LatencySampler::uniform_jitter(5.0, half), rng)
            .total_ms;
    const double gap = std::abs(total - det_total);
    CHECK(gap <= half * (c.n_nodes - 1) * tokens);  // hard bound
    CHECK(gap < previous_gap);
    previous_gap = gap;
  }
}

TEST_CASE("identical seeds give identical reports") {
  const ClusterConfig c{6, 1.0, 4.0};
  const LatencySampler s = LatencySampler::uniform_jitter(4.0, 2.0);
  SeededStream a(31337);
  SeededStream b(31337);
  const SimReport ra = simulate_standard(c, 50, s, a);
  const SimReport rb = simulate_standard(c, 50, s, b);
  REQUIRE(ra.traces.size() == rb.traces.size());
  CHECK(ra.total_ms == rb.total_ms);  // bitwise
  for (std::size_t i = 0; i < ra.traces.size(); ++i) {
    CHECK(ra.traces[i].comm_ms == rb.traces[i].comm_ms);
  }
}

TEST_CASE("measured speedup is the ratio of matching-coverage totals") {
  // ratio of the two reference totals, reports given directly
  SimReport std_rep;
  std_rep.total_ms = 64.0;
  std_rep.total_tokens = 4;
  SimReport dsd_rep;
  dsd_rep.total_ms = 19.0;
  dsd_rep.total_tokens = 4;
  CHECK(measured_speedup(std_rep, dsd_rep) ==
        doctest::Approx(64.0 / 19.0).epsilon(1e-12));
  CHECK(measured_speedup(std_rep, std_rep) == doctest::Approx(1.0));

  // end to end: one k=4 round commits 5 tokens, so the standard baseline
  // covers 5 tokens too
  const ClusterConfig c{4, 1.0, 5.0};
  const LatencySampler s = LatencySampler::deterministic(5.0);
  SeededStream rng(8);
  const SimReport sim_std = simulate_standard(c, 5, s, rng);
  const SimReport sim_dsd = simulate_dsd(c, constant_rounds(4, 1), s, rng);
  CHECK(measured_speedup(sim_std, sim_dsd) ==
        doctest::Approx(80.0 / 19.0).epsilon(1e-12));

  const SimReport shorter = simulate_standard(c, 4, s, rng);
  CHECK_THROWS_AS(measured_speedup(shorter, sim_dsd), IncomparableReportsError);
}

TEST_CASE("sampler validation") {
  CHECK_THROWS_AS(LatencySampler::deterministic(-1.0), InvariantError);
  CHECK_THROWS_AS(LatencySampler::uniform_jitter(1.0, -0.5), InvariantError);
  LatencySampler bad = LatencySampler::deterministic(1.0);
  bad.jitter_halfwidth_ms = 0.5;
  CHECK_THROWS_AS(bad.validate(), InvariantError);
  SeededStream rng(9);
  CHECK_THROWS_AS(simulate_standard(ClusterConfig{2, 1.0, 1.0}, 0,
                                    LatencySampler::deterministic(1.0), rng),
                  InvariantError);
  CHECK_THROWS_AS(simulate_dsd(ClusterConfig{2, 1.0, 1.0}, {},
                               LatencySampler::deterministic(1.0), rng),
                  InvariantError);
}
