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

#include "dsd/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dsd/error.hpp"

namespace dsd {

namespace {

void check_entries(const std::vector<double>& v) {
  if (v.size() < 2) {
    throw InvariantError("distribution needs a vocabulary of at least 2 tokens, got " +
                         std::to_string(v.size()));
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] < 0.0) {
      throw InvariantError("distribution entry " + std::to_string(i) +
                           " is negative or non-finite: " + std::to_string(v[i]));
    }
  }
}

}  // namespace

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  check_entries(probs_);
  double sum = 0.0;
  for (double p : probs_) sum += p;
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw InvariantError("distribution entries sum to " + std::to_string(sum) +
                         ", expected 1 within 1e-9");
  }
}

Distribution Distribution::from_weights(std::vector<double> weights) {
  check_entries(weights);
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (sum <= 0.0) {
    throw InvariantError("cannot normalize weights with zero total mass");
  }
  for (double& w : weights) w /= sum;
  return Distribution(std::move(weights), Unchecked{});
}

Distribution temperature_scale(const Distribution& d, double temperature) {
  if (!std::isfinite(temperature) || temperature < 0.0) {
    throw InvariantError("temperature must be a finite non-negative real, got " +
                         std::to_string(temperature));
  }
  if (temperature == 1.0) return d;

  const std::size_t n = d.size();
  if (temperature == 0.0) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (d[i] > d[best]) best = i;  // strict > keeps the lowest id on ties
    }
    std::vector<double> one_hot(n, 0.0);
    one_hot[best] = 1.0;
    return Distribution(std::move(one_hot));
  }

  // w_i = d_i^(1/T), stabilized by shifting the max log weight to zero.
  const double inv_t = 1.0 / temperature;
  std::vector<double> log_w(n);
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    log_w[i] = d[i] > 0.0 ? inv_t * std::log(d[i])
                          : -std::numeric_limits<double>::infinity();
    max_log = std::max(max_log, log_w[i]);
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::isinf(log_w[i]) ? 0.0 : std::exp(log_w[i] - max_log);
  }
  return Distribution::from_weights(std::move(w));
}

int sample(const Distribution& d, UniformStream& rng) {
  return sample_with_uniform(d, rng.next_uniform());
}

int sample_with_uniform(const Distribution& d, double u) {
  double cum = 0.0;
  int last_supported = -1;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > 0.0) last_supported = static_cast<int>(i);
    cum += d[i];
    if (u < cum) return static_cast<int>(i);
  }
  // u landed in the rounding gap above the accumulated sum; the final
  // supported token owns the remaining mass.
  return last_supported;
}

double total_variation(const Distribution& a, const Distribution& b) {
  if (a.size() != b.size()) {
    throw InvariantError("total variation requires equal vocabulary sizes");
  }
  double l1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) l1 += std::abs(a[i] - b[i]);
  return 0.5 * l1;
}

}  // namespace dsd
