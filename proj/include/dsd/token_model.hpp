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

#include "dsd/distribution.hpp"

namespace dsd {

/// Sequence of committed token ids. Ids are validated against a model's
/// vocabulary at the point of use.
struct Context {
  std::vector<int> tokens;

  Context() = default;
  explicit Context(std::vector<int> ids) : tokens(std::move(ids)) {}

  Context appended(int token) const {
    Context out = *this;
    out.tokens.push_back(token);
    return out;
  }
};

/// Fully inspectable synthetic language model. Two kinds:
///   - categorical-iid: one fixed next-token distribution, context ignored;
///   - markov-order-1:  a row-stochastic transition table keyed on the last
///     context token, plus an initial distribution for the empty context.
/// Temperature is applied to the selected row on every query.
class TokenModel {
 public:
  enum class Kind { CategoricalIid, MarkovOrder1 };

  static TokenModel categorical(Distribution next, double temperature = 1.0);
  static TokenModel markov(std::vector<Distribution> transition_rows,
                           Distribution initial, double temperature = 1.0);

  Kind kind() const { return kind_; }
  std::size_t vocab_size() const { return vocab_; }
  double temperature() const { return temperature_; }

 private:
  friend Distribution next_distribution(const TokenModel&, const Context&);

  TokenModel(Kind kind, std::size_t vocab, double temperature)
      : kind_(kind), vocab_(vocab), temperature_(temperature) {}

  Kind kind_;
  std::size_t vocab_;
  double temperature_;
  std::vector<Distribution> rows_;     // markov: transition table, one row per token
  std::vector<Distribution> initial_;  // markov: single-element, empty-context row
  std::vector<Distribution> iid_;      // categorical: single-element
};

/// Exact next-token distribution after temperature scaling. Deterministic
/// in (model, ctx). Throws InvalidContextError when the context carries a
/// token id outside the model's vocabulary.
Distribution next_distribution(const TokenModel& model, const Context& ctx);

}  // namespace dsd
