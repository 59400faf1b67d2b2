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

#include "dsd/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

namespace dsd {

ThresholdGrid ThresholdGrid::defaults() {
  ThresholdGrid g;
  g.ratio_limits = {1.2, 1.5, 2.0, 3.0};
  g.gap_limits = {0.05, 0.1, 0.2, 0.4};
  g.overlap_floors = {0.1, 0.3, 0.5, 0.8};
  return g;
}

void ThresholdGrid::validate() const {
  if (ratio_limits.empty() || gap_limits.empty() || overlap_floors.empty()) {
    throw InvariantError("threshold grid must be nonempty on every axis");
  }
}

KeyCriteria ThresholdGrid::strictest(int top_m) const {
  validate();
  KeyCriteria c;
  c.ratio_limit = *std::min_element(ratio_limits.begin(), ratio_limits.end());
  c.gap_limit = *std::min_element(gap_limits.begin(), gap_limits.end());
  c.overlap_floor = *std::max_element(overlap_floors.begin(), overlap_floors.end());
  c.top_m = top_m;
  return c;
}

namespace {

GridPointEval evaluate_point(const std::vector<ValidationItem>& items,
                             const KeyCriteria& criteria, double tau, double budget,
                             int gamma) {
  GridPointEval eval;
  eval.criteria = criteria;

  double len_sum = 0.0;
  double tv_sum = 0.0;
  for (const ValidationItem& item : items) {
    VerifyParams adaptive{gamma, tau, criteria};
    len_sum += expected_accepted_count(item.draft, item.target, item.prompt, adaptive) + 1.0;

    const SequenceDistribution relaxed = enumerate_output_distribution(
        item.draft, item.target, item.prompt, item.horizon, adaptive);
    VerifyParams strict = adaptive;
    strict.tau = 0.0;
    const SequenceDistribution reference = enumerate_output_distribution(
        item.draft, item.target, item.prompt, item.horizon, strict);
    tv_sum += total_variation(relaxed, reference);
  }
  eval.avg_accepted_len = len_sum / static_cast<double>(items.size());
  eval.divergence = tv_sum / static_cast<double>(items.size());
  eval.feasible = eval.divergence <= budget;
  return eval;
}

}  // namespace

CalibrationResult calibrate_thresholds(const std::vector<ValidationItem>& items,
                                       double tau, double budget,
                                       const ThresholdGrid& grid, int gamma,
                                       int top_m) {
  if (items.empty()) {
    throw InvariantError("calibration needs at least one validation item");
  }
  if (!(budget > 0.0 && budget < 1.0)) {
    throw InvariantError("calibration budget must lie in (0, 1), got " +
                         std::to_string(budget));
  }
  grid.validate();

  // Deterministic lexicographic walk over the grid.
  std::vector<double> ratios = grid.ratio_limits;
  std::vector<double> gaps = grid.gap_limits;
  std::vector<double> overlaps = grid.overlap_floors;
  std::sort(ratios.begin(), ratios.end());
  std::sort(gaps.begin(), gaps.end());
  std::sort(overlaps.begin(), overlaps.end());

  CalibrationResult result;
  const GridPointEval* best = nullptr;
  for (double ratio : ratios) {
    for (double gap : gaps) {
      for (double overlap : overlaps) {
        KeyCriteria c{ratio, gap, overlap, top_m};
        c.validate();
        result.grid_log.push_back(evaluate_point(items, c, tau, budget, gamma));
      }
    }
  }

  for (const GridPointEval& eval : result.grid_log) {
    if (!eval.feasible) continue;
    if (best == nullptr) {
      best = &eval;
      continue;
    }
    const auto key = [](const GridPointEval& e) {
      // Maximize length; break ties by smaller divergence, then smaller
      // (ratio, gap, overlap). Negations turn it into one ascending tuple.
      return std::make_tuple(-e.avg_accepted_len, e.divergence, e.criteria.ratio_limit,
                             e.criteria.gap_limit, e.criteria.overlap_floor);
    };
    if (key(eval) < key(*best)) best = &eval;
  }

  if (best == nullptr) {
    const KeyCriteria strictest = grid.strictest(top_m);
    GridPointEval strictest_eval;
    for (const GridPointEval& eval : result.grid_log) {
      if (eval.criteria.ratio_limit == strictest.ratio_limit &&
          eval.criteria.gap_limit == strictest.gap_limit &&
          eval.criteria.overlap_floor == strictest.overlap_floor) {
        strictest_eval = eval;
        break;
      }
    }
    throw InfeasibleBudgetError(
        "no grid point meets the divergence budget " + std::to_string(budget) +
            "; strictest point diverges by " + std::to_string(strictest_eval.divergence),
        strictest_eval);
  }

  result.criteria = best->criteria;
  result.avg_accepted_len = best->avg_accepted_len;
  result.divergence = best->divergence;
  return result;
}

}  // namespace dsd
