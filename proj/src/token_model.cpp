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

#include "dsd/token_model.hpp"

#include <cmath>
#include <string>

#include "dsd/error.hpp"

namespace dsd {

namespace {

void check_temperature(double t) {
  if (!std::isfinite(t) || t < 0.0) {
    throw InvariantError("model temperature must be finite and >= 0, got " +
                         std::to_string(t));
  }
}

}  // namespace

TokenModel TokenModel::categorical(Distribution next, double temperature) {
  check_temperature(temperature);
  TokenModel m(Kind::CategoricalIid, next.size(), temperature);
  m.iid_.push_back(std::move(next));
  return m;
}

TokenModel TokenModel::markov(std::vector<Distribution> transition_rows,
                              Distribution initial, double temperature) {
  check_temperature(temperature);
  const std::size_t vocab = initial.size();
  if (transition_rows.size() != vocab) {
    throw InvariantError("markov transition table must have one row per token: " +
                         std::to_string(transition_rows.size()) + " rows for vocab " +
                         std::to_string(vocab));
  }
  for (std::size_t i = 0; i < transition_rows.size(); ++i) {
    if (transition_rows[i].size() != vocab) {
      throw InvariantError("markov row " + std::to_string(i) + " has length " +
                           std::to_string(transition_rows[i].size()) +
                           ", expected " + std::to_string(vocab));
    }
  }
  TokenModel m(Kind::MarkovOrder1, vocab, temperature);
  m.rows_ = std::move(transition_rows);
  m.initial_.push_back(std::move(initial));
  return m;
}

Distribution next_distribution(const TokenModel& model, const Context& ctx) {
  for (int id : ctx.tokens) {
    if (id < 0 || static_cast<std::size_t>(id) >= model.vocab_size()) {
      throw InvalidContextError("context token id " + std::to_string(id) +
                                " outside vocabulary of size " +
                                std::to_string(model.vocab_size()));
    }
  }
  switch (model.kind()) {
    case TokenModel::Kind::CategoricalIid:
      return temperature_scale(model.iid_.front(), model.temperature());
    case TokenModel::Kind::MarkovOrder1: {
      const Distribution& row = ctx.tokens.empty()
                                    ? model.initial_.front()
                                    : model.rows_[static_cast<std::size_t>(ctx.tokens.back())];
      return temperature_scale(row, model.temperature());
    }
  }
  throw Error("unreachable: unknown model kind");
}

}  // namespace dsd
