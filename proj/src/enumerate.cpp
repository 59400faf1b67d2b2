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

#include "dsd/enumerate.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "dsd/error.hpp"

namespace dsd {

namespace {

void check_guard(const TokenModel& draft, const TokenModel& target, int horizon,
                 int gamma) {
  if (draft.vocab_size() != target.vocab_size()) {
    throw InvariantError("draft and target models must share a vocabulary");
  }
  if (draft.vocab_size() > EnumerationGuard::kMaxVocab || horizon < 1 ||
      horizon > EnumerationGuard::kMaxHorizon || gamma > EnumerationGuard::kMaxGamma) {
    throw EnumerationTooLargeError(
        "enumeration guard exceeded: need vocab <= " +
        std::to_string(EnumerationGuard::kMaxVocab) + ", 1 <= horizon <= " +
        std::to_string(EnumerationGuard::kMaxHorizon) + ", gamma <= " +
        std::to_string(EnumerationGuard::kMaxGamma));
  }
}

Context with_suffix(const Context& prompt, const std::vector<int>& committed) {
  Context ctx = prompt;
  ctx.tokens.insert(ctx.tokens.end(), committed.begin(), committed.end());
  return ctx;
}

}  // namespace

SequenceDistribution enumerate_output_distribution(const TokenModel& draft,
                                                   const TokenModel& target,
                                                   const Context& prompt, int horizon,
                                                   const VerifyParams& params) {
  params.validate();
  check_guard(draft, target, horizon, params.gamma);

  // Forward dynamic program. A state is (committed tokens, position inside
  // the current draft window); every transition — accept, residual resample,
  // bonus sample — commits exactly one token, so after `horizon` sweeps all
  // surviving states carry sequences of exactly `horizon` tokens.
  using State = std::pair<std::vector<int>, int>;
  std::map<State, double> level;
  level.emplace(State{{}, 0}, 1.0);

  const int vocab = static_cast<int>(draft.vocab_size());
  for (int step = 0; step < horizon; ++step) {
    std::map<State, double> next;
    auto flow = [&next](std::vector<int> committed, int pos, double mass) {
      next[State{std::move(committed), pos}] += mass;
    };

    for (const auto& [state, prob] : level) {
      const auto& [committed, pos] = state;
      const Context prefix = with_suffix(prompt, committed);

      if (pos == params.gamma) {
        // Window exhausted: bonus token from the target, new round begins.
        const Distribution bonus = next_distribution(target, prefix);
        for (int z = 0; z < vocab; ++z) {
          if (bonus[static_cast<std::size_t>(z)] <= 0.0) continue;
          std::vector<int> grown = committed;
          grown.push_back(z);
          flow(std::move(grown), 0, prob * bonus[static_cast<std::size_t>(z)]);
        }
        continue;
      }

      const Distribution p_draft = next_distribution(draft, prefix);
      const Distribution p_target = next_distribution(target, prefix);
      for (int y = 0; y < vocab; ++y) {
        const double draft_mass = p_draft[static_cast<std::size_t>(y)];
        if (draft_mass <= 0.0) continue;
        const bool key = is_key(p_target, p_draft, y, params.criteria);
        const Distribution effective =
            key ? p_target : soften(p_target, p_draft, params.tau);
        double accept = accept_prob(effective, p_draft, y);
        // soften() of nearly identical inputs leaves ulp-scale wobble in the
        // ratio; fold sub-1e-12 rejection mass into acceptance so the reject
        // branch only opens on real probability (distortion <= 4e-12 total).
        if (accept > 1.0 - 1e-12) accept = 1.0;

        if (accept > 0.0) {
          std::vector<int> grown = committed;
          grown.push_back(y);
          flow(std::move(grown), pos + 1, prob * draft_mass * accept);
        }
        if (accept < 1.0) {
          const double reject_mass = prob * draft_mass * (1.0 - accept);
          const Distribution residual = residual_distribution(effective, p_draft);
          for (int z = 0; z < vocab; ++z) {
            if (residual[static_cast<std::size_t>(z)] <= 0.0) continue;
            std::vector<int> grown = committed;
            grown.push_back(z);
            flow(std::move(grown), 0, reject_mass * residual[static_cast<std::size_t>(z)]);
          }
        }
      }
    }
    level = std::move(next);
  }

  SequenceDistribution out;
  for (const auto& [state, prob] : level) out[state.first] += prob;
  return out;
}

SequenceDistribution enumerate_target_distribution(const TokenModel& target,
                                                   const Context& prompt, int horizon) {
  if (target.vocab_size() > EnumerationGuard::kMaxVocab || horizon < 1 ||
      horizon > EnumerationGuard::kMaxHorizon) {
    throw EnumerationTooLargeError("target enumeration guard exceeded");
  }
  const int vocab = static_cast<int>(target.vocab_size());
  SequenceDistribution level;
  level.emplace(std::vector<int>{}, 1.0);
  for (int step = 0; step < horizon; ++step) {
    SequenceDistribution next;
    for (const auto& [seq, prob] : level) {
      const Distribution dist = next_distribution(target, with_suffix(prompt, seq));
      for (int y = 0; y < vocab; ++y) {
        if (dist[static_cast<std::size_t>(y)] <= 0.0) continue;
        std::vector<int> grown = seq;
        grown.push_back(y);
        next[std::move(grown)] += prob * dist[static_cast<std::size_t>(y)];
      }
    }
    level = std::move(next);
  }
  return level;
}

double expected_accepted_count(const TokenModel& draft, const TokenModel& target,
                               const Context& ctx, const VerifyParams& params) {
  params.validate();
  check_guard(draft, target, 1, params.gamma);

  // E[extra accepted from position pos] =
  //   sum_y p_d(y) * accept(y) * (1 + E[from pos+1 with y appended]);
  // rejections end the round and contribute nothing further.
  const int vocab = static_cast<int>(draft.vocab_size());
  auto expected_from = [&](auto&& self, const Context& prefix, int pos) -> double {
    if (pos == params.gamma) return 0.0;
    const Distribution p_draft = next_distribution(draft, prefix);
    const Distribution p_target = next_distribution(target, prefix);
    double expected = 0.0;
    for (int y = 0; y < vocab; ++y) {
      const double draft_mass = p_draft[static_cast<std::size_t>(y)];
      if (draft_mass <= 0.0) continue;
      const bool key = is_key(p_target, p_draft, y, params.criteria);
      const Distribution effective =
          key ? p_target : soften(p_target, p_draft, params.tau);
      double accept = accept_prob(effective, p_draft, y);
      if (accept > 1.0 - 1e-12) accept = 1.0;  // same wobble fold as above
      if (accept <= 0.0) continue;
      expected += draft_mass * accept * (1.0 + self(self, prefix.appended(y), pos + 1));
    }
    return expected;
  };
  return expected_from(expected_from, ctx, 0);
}

double total_variation(const SequenceDistribution& a, const SequenceDistribution& b) {
  double l1 = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      l1 += std::abs(ia->second);
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      l1 += std::abs(ib->second);
      ++ib;
    } else {
      l1 += std::abs(ia->second - ib->second);
      ++ia;
      ++ib;
    }
  }
  return 0.5 * l1;
}

}  // namespace dsd
