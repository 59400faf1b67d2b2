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

#include "dsd/enumerate.hpp"
#include "dsd/error.hpp"
#include "dsd/token_model.hpp"
#include "dsd/verifier.hpp"

namespace dsd {

/// One calibration instance: a prompt and a model pair small enough for
/// exact enumeration, plus the horizon over which output divergence is
/// measured.
struct ValidationItem {
  Context prompt;
  TokenModel draft;
  TokenModel target;
  int horizon = 2;
};

/// Cartesian grid of candidate thresholds.
struct ThresholdGrid {
  std::vector<double> ratio_limits;
  std::vector<double> gap_limits;
  std::vector<double> overlap_floors;

  /// Grid bracketing the clause semantics: ratio near 1 means agreement,
  /// small gaps are benign, high overlap is benign.
  static ThresholdGrid defaults();

  void validate() const;

  /// The point marking the most tokens key: smallest ratio and gap limits,
  /// largest overlap floor.
  KeyCriteria strictest(int top_m) const;
};

/// Exact evaluation of one grid point over the validation set.
struct GridPointEval {
  KeyCriteria criteria;
  double avg_accepted_len = 0.0;  // mean over items of E[accepted] + 1
  double divergence = 0.0;        // mean TV between adaptive and strict outputs
  bool feasible = false;
};

/// Winning thresholds plus the full grid log for inspection.
struct CalibrationResult {
  KeyCriteria criteria;
  double avg_accepted_len = 0.0;
  double divergence = 0.0;
  std::vector<GridPointEval> grid_log;
};

/// No grid point met the divergence budget. Carries the evaluation of the
/// strictest point so callers can see how far off it was.
struct InfeasibleBudgetError : Error {
  InfeasibleBudgetError(const std::string& message, GridPointEval strictest_point)
      : Error(message), strictest(std::move(strictest_point)) {}
  GridPointEval strictest;
};

/// Training-free threshold search: evaluates every (ratio, gap, overlap)
/// triple by exact enumeration, then returns the point maximizing mean
/// accepted length subject to divergence <= budget. Ties break toward
/// smaller divergence, then lexicographically smaller thresholds.
CalibrationResult calibrate_thresholds(const std::vector<ValidationItem>& items,
                                       double tau, double budget,
                                       const ThresholdGrid& grid, int gamma,
                                       int top_m = 10);

}  // namespace dsd
