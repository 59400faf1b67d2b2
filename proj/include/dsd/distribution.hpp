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

#include <cstddef>
#include <vector>

#include "dsd/rng.hpp"

namespace dsd {

/// Probability vector over a finite vocabulary of at least two tokens.
/// Entries are non-negative and sum to one within 1e-9; both checks run
/// at construction so downstream code never revalidates.
class Distribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  /// Validating constructor. Throws InvariantError on any violation.
  explicit Distribution(std::vector<double> probs);

  /// Builds a distribution from non-negative weights by renormalizing.
  /// Throws InvariantError if the total mass is zero or any weight is
  /// negative / non-finite.
  static Distribution from_weights(std::vector<double> weights);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }

  bool operator==(const Distribution& other) const = default;

 private:
  struct Unchecked {};
  Distribution(std::vector<double> probs, Unchecked) : probs_(std::move(probs)) {}

  std::vector<double> probs_;
};

/// Rescales a distribution by temperature. T=1 is the identity, T=0 is a
/// one-hot at the argmax (ties resolved toward the lowest token id), and
/// any other T>0 raises entries to the power 1/T and renormalizes.
/// Computed in log space so extreme temperatures do not underflow.
Distribution temperature_scale(const Distribution& d, double temperature);

/// Draws one token by inverse-CDF over ascending token ids, consuming
/// exactly one uniform draw from the stream.
int sample(const Distribution& d, UniformStream& rng);

/// Inverse-CDF lookup for an externally supplied uniform draw in [0, 1).
int sample_with_uniform(const Distribution& d, double u);

/// Total variation distance: half the L1 distance between the vectors.
/// Sizes must match.
double total_variation(const Distribution& a, const Distribution& b);

}  // namespace dsd
