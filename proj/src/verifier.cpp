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

#include "dsd/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dsd/error.hpp"

namespace dsd {

namespace {

constexpr double kCertainSurprisal = 1e-12;

void check_token_in_vocab(const Distribution& d, int token, const char* what) {
  if (token < 0 || static_cast<std::size_t>(token) >= d.size()) {
    throw InvariantError(std::string(what) + ": token id " + std::to_string(token) +
                         " outside vocabulary of size " + std::to_string(d.size()));
  }
}

/// Token ids ordered by (probability desc, id asc), truncated to top_m.
std::vector<int> top_ids(const Distribution& d, int top_m) {
  std::vector<int> ids(d.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
    if (d[static_cast<std::size_t>(a)] != d[static_cast<std::size_t>(b)]) {
      return d[static_cast<std::size_t>(a)] > d[static_cast<std::size_t>(b)];
    }
    return a < b;
  });
  ids.resize(static_cast<std::size_t>(top_m));
  return ids;
}

}  // namespace

void KeyCriteria::validate() const {
  if (std::isnan(ratio_limit) || ratio_limit <= 0.0) {
    throw InvariantError("criteria.ratio_limit must be > 0, got " +
                         std::to_string(ratio_limit));
  }
  if (!std::isfinite(gap_limit) || gap_limit < 0.0 || gap_limit > 1.0) {
    throw InvariantError("criteria.gap_limit must lie in [0, 1], got " +
                         std::to_string(gap_limit));
  }
  if (!std::isfinite(overlap_floor) || overlap_floor < 0.0 || overlap_floor > 1.0) {
    throw InvariantError("criteria.overlap_floor must lie in [0, 1], got " +
                         std::to_string(overlap_floor));
  }
  if (top_m < 1) {
    throw InvariantError("criteria.top_m must be >= 1, got " + std::to_string(top_m));
  }
}

KeyCriteria KeyCriteria::none() {
  return KeyCriteria{std::numeric_limits<double>::infinity(), 1.0, 0.0, 1};
}

int VerificationResult::key_count() const {
  int n = 0;
  for (const TokenDecision& d : decisions) n += d.is_key ? 1 : 0;
  return n;
}

void VerifyParams::validate() const {
  if (gamma < 1) {
    throw InvariantError("gamma must be >= 1, got " + std::to_string(gamma));
  }
  if (!std::isfinite(tau) || tau < 0.0 || tau > 1.0) {
    throw InvariantError("tau must lie in [0, 1], got " + std::to_string(tau));
  }
  criteria.validate();
}

DraftWindow draft_window(const TokenModel& draft, const Context& ctx, int gamma,
                         UniformStream& rng) {
  if (gamma < 1) {
    throw InvariantError("draft window length must be >= 1, got " + std::to_string(gamma));
  }
  DraftWindow window;
  window.tokens.reserve(static_cast<std::size_t>(gamma));
  window.draft_dists.reserve(static_cast<std::size_t>(gamma));
  Context cur = ctx;
  for (int j = 0; j < gamma; ++j) {
    Distribution dist = next_distribution(draft, cur);
    const int token = sample(dist, rng);
    cur.tokens.push_back(token);
    window.tokens.push_back(token);
    window.draft_dists.push_back(std::move(dist));
  }
  return window;
}

double token_cross_entropy(const Distribution& d, int token) {
  check_token_in_vocab(d, token, "token_cross_entropy");
  const double p = d[static_cast<std::size_t>(token)];
  if (p <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(p);
}

double norm_match(const Distribution& target, const Distribution& draft, int top_m) {
  if (target.size() != draft.size()) {
    throw InvariantError("norm_match requires equal vocabulary sizes");
  }
  if (top_m < 1 || static_cast<std::size_t>(top_m) > target.size()) {
    throw InvariantError("norm_match top_m must lie in [1, vocab], got " +
                         std::to_string(top_m));
  }
  const std::vector<int> top_t = top_ids(target, top_m);
  const std::vector<int> top_d = top_ids(draft, top_m);
  std::vector<bool> in_target(target.size(), false);
  for (int id : top_t) in_target[static_cast<std::size_t>(id)] = true;
  int shared = 0;
  for (int id : top_d) shared += in_target[static_cast<std::size_t>(id)] ? 1 : 0;
  return static_cast<double>(shared) / static_cast<double>(top_m);
}

bool is_key(const Distribution& target, const Distribution& draft, int token,
            const KeyCriteria& criteria) {
  criteria.validate();
  check_token_in_vocab(target, token, "is_key");
  const double h_draft = token_cross_entropy(draft, token);
  const double h_target = token_cross_entropy(target, token);

  bool ratio_clause;
  if (h_target < kCertainSurprisal) {
    // Target is certain about this token: key iff the draft disagrees at all.
    ratio_clause = h_draft > 0.0;
  } else {
    ratio_clause = (h_draft / h_target) > criteria.ratio_limit;
  }

  const double gap = std::abs(target[static_cast<std::size_t>(token)] -
                              draft[static_cast<std::size_t>(token)]);
  const bool gap_clause = gap > criteria.gap_limit;

  const int m = std::min<int>(criteria.top_m, static_cast<int>(target.size()));
  const bool overlap_clause = norm_match(target, draft, m) < criteria.overlap_floor;

  return ratio_clause || gap_clause || overlap_clause;
}

Distribution soften(const Distribution& target, const Distribution& draft, double tau) {
  if (!std::isfinite(tau) || tau < 0.0 || tau > 1.0) {
    throw InvariantError("soften tau must lie in [0, 1], got " + std::to_string(tau));
  }
  if (target.size() != draft.size()) {
    throw InvariantError("soften requires equal vocabulary sizes");
  }
  // Exact endpoints, bit for bit. Identical inputs are their own mixture;
  // short-circuiting keeps pow() wobble out of the acceptance ratios.
  if (tau == 0.0) return target;
  if (tau == 1.0) return draft;
  if (target == draft) return target;

  std::vector<double> w(target.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    // pow(0, positive) == 0, so any token unsupported on either side drops out.
    w[i] = std::pow(target[i], 1.0 - tau) * std::pow(draft[i], tau);
    mass += w[i];
  }
  if (mass <= 0.0) {
    throw DegenerateMixtureError(
        "softened distribution has zero mass: target and draft supports are disjoint");
  }
  return Distribution::from_weights(std::move(w));
}

double accept_prob(const Distribution& effective, const Distribution& draft, int token) {
  check_token_in_vocab(draft, token, "accept_prob");
  const double p_draft = draft[static_cast<std::size_t>(token)];
  if (p_draft <= 0.0) {
    throw DraftingContractError("token " + std::to_string(token) +
                                " has zero draft probability; it cannot have been drafted");
  }
  return std::min(1.0, effective[static_cast<std::size_t>(token)] / p_draft);
}

Distribution residual_distribution(const Distribution& effective,
                                   const Distribution& draft) {
  if (effective.size() != draft.size()) {
    throw InvariantError("residual requires equal vocabulary sizes");
  }
  std::vector<double> w(effective.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::max(0.0, effective[i] - draft[i]);
    mass += w[i];
  }
  if (mass <= 0.0) {
    throw EmptyResidualError("residual is empty: effective and draft distributions match");
  }
  return Distribution::from_weights(std::move(w));
}

VerificationResult verify_round(const TokenModel& draft, const TokenModel& target,
                                const Context& ctx, const VerifyParams& params,
                                UniformStream& rng) {
  params.validate();
  const DraftWindow window = draft_window(draft, ctx, params.gamma, rng);

  VerificationResult result;
  Context prefix = ctx;  // committed prefix plus accepted draft tokens
  for (int j = 0; j < params.gamma; ++j) {
    const int token = window.tokens[static_cast<std::size_t>(j)];
    const Distribution& p_draft = window.draft_dists[static_cast<std::size_t>(j)];
    const Distribution p_target = next_distribution(target, prefix);

    TokenDecision decision;
    decision.token = token;
    decision.is_key = is_key(p_target, p_draft, token, params.criteria);
    decision.tau_used = decision.is_key ? 0.0 : params.tau;
    const Distribution effective =
        decision.is_key ? p_target : soften(p_target, p_draft, params.tau);
    decision.accept_prob = accept_prob(effective, p_draft, token);

    const double u = rng.next_uniform();
    decision.accepted = u < decision.accept_prob;
    if (decision.accepted) {
      result.decisions.push_back(std::move(decision));
      ++result.accepted_count;
      prefix.tokens.push_back(token);
      continue;
    }

    const Distribution residual = residual_distribution(effective, p_draft);
    decision.replacement = sample(residual, rng);
    result.extra_token = *decision.replacement;
    result.extra_source = ExtraSource::ResidualResample;
    result.decisions.push_back(std::move(decision));
    return result;
  }

  // Whole window accepted: bonus token from the target one step past it.
  result.extra_token = sample(next_distribution(target, prefix), rng);
  result.extra_source = ExtraSource::BonusFromTarget;
  return result;
}

GenerationResult generate(const TokenModel& draft, const TokenModel& target,
                          const Context& prompt, int max_new,
                          const VerifyParams& params, UniformStream& rng) {
  params.validate();
  if (max_new < 1) {
    throw InvariantError("max_new must be >= 1, got " + std::to_string(max_new));
  }
  GenerationResult out;
  Context ctx = prompt;
  while (static_cast<int>(out.tokens.size()) < max_new) {
    VerificationResult round = verify_round(draft, target, ctx, params, rng);
    for (const TokenDecision& d : round.decisions) {
      if (d.accepted) {
        out.tokens.push_back(d.token);
        ctx.tokens.push_back(d.token);
      }
    }
    out.tokens.push_back(round.extra_token);
    ctx.tokens.push_back(round.extra_token);
    out.rounds.push_back(std::move(round));
  }
  out.tokens.resize(static_cast<std::size_t>(max_new));
  return out;
}

}  // namespace dsd
