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
#include <vector>

#include "dsd/distribution.hpp"
#include "dsd/rng.hpp"
#include "dsd/token_model.hpp"

namespace dsd {

/// Thresholds that decide whether a drafted token is "key" (semantically
/// influential) and must be verified strictly. A token is key if ANY of:
///   - draft/target surprisal ratio exceeds ratio_limit,
///   - |p_t(y) - p_d(y)| exceeds gap_limit,
///   - top-m support overlap falls below overlap_floor.
struct KeyCriteria {
  double ratio_limit = 2.0;     // > 0; may be +inf to disable the clause
  double gap_limit = 0.2;       // in [0, 1]
  double overlap_floor = 0.5;   // in [0, 1]
  int top_m = 10;               // >= 1; clamped to the vocabulary at use

  void validate() const;

  /// Marks nothing key: the ratio clause is unreachable (+inf), a
  /// probability gap cannot exceed 1, and overlap cannot drop below 0.
  static KeyCriteria none();
};

/// Window of drafted tokens plus the exact draft distribution each one was
/// sampled from, position by position.
struct DraftWindow {
  std::vector<int> tokens;
  std::vector<Distribution> draft_dists;

  std::size_t size() const { return tokens.size(); }
};

/// Per-token verdict of one verification round.
struct TokenDecision {
  int token = 0;
  bool is_key = false;
  double tau_used = 0.0;          // always 0 for key tokens
  double accept_prob = 0.0;
  bool accepted = false;
  std::optional<int> replacement;  // set iff rejected
};

/// Where the round's guaranteed extra token came from.
enum class ExtraSource {
  BonusFromTarget,   // full window accepted; one fresh target sample
  ResidualResample,  // rejection; resample from the positive residual
};

/// Outcome of one draft-verify round. `decisions` stops at the first
/// rejection (which is included); `accepted_count` counts only accepted
/// positions. Exactly one extra token is committed per round, so a round
/// always advances the sequence by accepted_count + 1.
struct VerificationResult {
  std::vector<TokenDecision> decisions;
  int accepted_count = 0;
  int extra_token = 0;
  ExtraSource extra_source = ExtraSource::BonusFromTarget;

  int key_count() const;
  int tokens_committed() const { return accepted_count + 1; }
};

/// Verification parameters shared by verify_round, generate and the exact
/// enumerators.
struct VerifyParams {
  int gamma = 8;                      // draft window length, >= 1
  double tau = 0.2;                   // relaxation coefficient in [0, 1]
  KeyCriteria criteria = {};

  void validate() const;
};

/// Full generation output: the committed tokens (prompt excluded) and the
/// per-round log that metrics and the simulator consume.
struct GenerationResult {
  std::vector<int> tokens;
  std::vector<VerificationResult> rounds;
};

/// Samples a gamma-token window autoregressively from the draft model and
/// records the distribution used at every position.
DraftWindow draft_window(const TokenModel& draft, const Context& ctx, int gamma,
                         UniformStream& rng);

/// Per-token surprisal -ln d_y; +infinity when the token has no support.
double token_cross_entropy(const Distribution& d, int token);

/// Fraction of the top_m highest-probability token ids the two
/// distributions share; ties broken toward the lowest id. In [0, 1].
double norm_match(const Distribution& target, const Distribution& draft, int top_m);

/// Evaluates the key-token criteria for drafted token y. When the target
/// is certain about y (surprisal below 1e-12) the ratio clause degenerates:
/// it fires iff the draft shows any surprisal at all.
bool is_key(const Distribution& target, const Distribution& draft, int token,
            const KeyCriteria& criteria);

/// Geometric interpolation target^(1-tau) * draft^tau, renormalized.
/// tau=0 returns the target unchanged, tau=1 the draft unchanged. Throws
/// DegenerateMixtureError when the supports are disjoint at interior tau.
Distribution soften(const Distribution& target, const Distribution& draft, double tau);

/// Speculative acceptance probability min(1, p_eff(y) / p_d(y)). The token
/// must be in the draft support (it was sampled from it).
double accept_prob(const Distribution& effective, const Distribution& draft, int token);

/// Normalized positive part of (effective - draft); the rejection-branch
/// resampling distribution that preserves the effective distribution.
Distribution residual_distribution(const Distribution& effective,
                                   const Distribution& draft);

/// One full round: draft a window, walk it in order classifying each token
/// key/non-key, accept against the target (key) or the softened target
/// (non-key), stop at the first rejection. The extra token comes from the
/// rejected position's residual, or from a fresh target sample when the
/// whole window passed.
VerificationResult verify_round(const TokenModel& draft, const TokenModel& target,
                                const Context& ctx, const VerifyParams& params,
                                UniformStream& rng);

/// Repeats verify_round until at least max_new tokens are committed, then
/// truncates to exactly max_new. The round log is returned untruncated.
GenerationResult generate(const TokenModel& draft, const TokenModel& target,
                          const Context& prompt, int max_new,
                          const VerifyParams& params, UniformStream& rng);

}  // namespace dsd
