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

#include <stdexcept>
#include <string>

namespace dsd {

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A domain value violated one of its invariants (probability out of range,
/// non-stochastic row, bad parameter...).
struct InvariantError : Error {
  using Error::Error;
};

/// A context carried a token id outside the model's vocabulary.
struct InvalidContextError : Error {
  using Error::Error;
};

/// The geometric mixture of two distributions had zero total mass
/// (disjoint supports with an interior mixing coefficient).
struct DegenerateMixtureError : Error {
  using Error::Error;
};

/// A token submitted for acceptance was not in the support of the draft
/// distribution it was claimed to be sampled from.
struct DraftingContractError : Error {
  using Error::Error;
};

/// The rejection residual max(0, p_eff - p_d) had no positive mass,
/// which only happens when the two distributions are identical.
struct EmptyResidualError : Error {
  using Error::Error;
};

/// An exact enumeration request exceeded the tractability guard.
struct EnumerationTooLargeError : Error {
  using Error::Error;
};

/// Two simulation reports cover different token counts and cannot be
/// compared as a speedup ratio.
struct IncomparableReportsError : Error {
  using Error::Error;
};

/// A CSV or report file could not be written.
struct WriteError : Error {
  using Error::Error;
};

}  // namespace dsd
