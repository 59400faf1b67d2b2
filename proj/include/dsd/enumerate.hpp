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

#include <map>
#include <vector>

#include "dsd/token_model.hpp"
#include "dsd/verifier.hpp"

namespace dsd {

/// Exact probability assigned to each token sequence of a fixed length.
using SequenceDistribution = std::map<std::vector<int>, double>;

/// Tractability guard for the exact enumerators.
struct EnumerationGuard {
  static constexpr std::size_t kMaxVocab = 8;
  static constexpr int kMaxHorizon = 4;
  static constexpr int kMaxGamma = 4;
};

/// Expands every stochastic branch of the draft-verify loop (draft samples,
/// accept/reject outcomes, residual and bonus samples) into an exact
/// distribution over the first `horizon` committed tokens. Probabilities
/// sum to 1 within 1e-9. Throws EnumerationTooLargeError outside the guard.
SequenceDistribution enumerate_output_distribution(const TokenModel& draft,
                                                   const TokenModel& target,
                                                   const Context& prompt, int horizon,
                                                   const VerifyParams& params);

/// Exact autoregressive distribution of the target model over sequences of
/// length `horizon` — the independent reference the speculative loop must
/// reproduce in strict mode.
SequenceDistribution enumerate_target_distribution(const TokenModel& target,
                                                   const Context& prompt, int horizon);

/// Exact expected number of accepted draft tokens in a single verification
/// round started from `ctx`.
double expected_accepted_count(const TokenModel& draft, const TokenModel& target,
                               const Context& ctx, const VerifyParams& params);

/// Total variation distance between two sequence distributions (half the
/// L1 distance over the union of their supports).
double total_variation(const SequenceDistribution& a, const SequenceDistribution& b);

}  // namespace dsd
