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

#include <cstdint>
#include <random>

namespace dsd {

/// Source of uniform draws in [0, 1). Every stochastic operation in the
/// library pulls from this interface so tests can script exact draws.
class UniformStream {
 public:
  virtual ~UniformStream() = default;
  virtual double next_uniform() = 0;
};

/// Seeded stream backed by std::mt19937_64. The 64-bit engine and the
/// 53-bit mantissa mapping are both pinned by the standard, so identical
/// seeds produce identical draw sequences on every platform.
class SeededStream final : public UniformStream {
 public:
  explicit SeededStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  double next_uniform() override {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed() const { return seed_; }

  /// Derives an independently seeded stream for a named purpose (e.g. the
  /// network jitter of a simulation that must not disturb generation).
  SeededStream fork(std::uint64_t stream_tag) const {
    // SplitMix64 finalizer over (seed, tag); decorrelates nearby seeds.
    std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * (stream_tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return SeededStream(z ^ (z >> 31));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace dsd
