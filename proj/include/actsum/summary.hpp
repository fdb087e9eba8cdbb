// Copyright 2026 The actsum Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Keyshot summaries: frame quality scores averaged per shot, then an exact
// 0/1 knapsack over shots under a duration budget.

#ifndef ACTSUM_SUMMARY_HPP_
#define ACTSUM_SUMMARY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "actsum/error.hpp"
#include "actsum/mask.hpp"
#include "actsum/model.hpp"
#include "actsum/random.hpp"
#include "actsum/segmentation.hpp"

namespace actsum {

inline constexpr double kDefaultBudget = 0.15;

struct SummaryMask {
  FrameMask selected;
  SegmentList shots;
  std::vector<std::size_t> selected_shots;  // ascending
  std::size_t budget_frames = 0;
};

// floor(budget * n), tolerant of products such as 0.15 * 60 landing just
// below an integer.
inline std::size_t BudgetFrames(double budget, std::size_t n) {
  if (!(budget >= 0.0 && budget <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "budget must lie in [0, 1]");
  }
  return static_cast<std::size_t>(
      std::floor(budget * static_cast<double>(n) + 1e-9));
}

// Per-frame importance: the quality head output q.
inline std::vector<double> FrameScores(const ModelParameters& model,
                                       const Matrix& features) {
  return ModelForward(model, features).outputs.q;
}

inline std::vector<double> ShotScores(std::span<const double> scores,
                                      const SegmentList& shots) {
  ValidatePartition(shots, scores.size());
  std::vector<double> out;
  out.reserve(shots.size());
  for (const Segment& s : shots) {
    double acc = 0.0;
    for (std::size_t f = s.start; f < s.end; ++f) acc += scores[f];
    out.push_back(acc / static_cast<double>(s.length()));
  }
  return out;
}

// Exact 0/1 knapsack by dynamic programming over capacities. Among optimal
// value ties (1e-12) the smaller total length wins, then the lexicographically
// smallest index set. Returns ascending shot indices.
inline std::vector<std::size_t> KnapsackSelect(
    std::span<const double> values, std::span<const std::size_t> lengths,
    std::size_t budget_frames) {
  if (values.size() != lengths.size()) {
    throw Error(ErrorCode::kLengthMismatch, "values and lengths differ");
  }
  const std::size_t k = values.size();
  for (std::size_t i = 0; i < k; ++i) {
    if (lengths[i] == 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "shot " + std::to_string(i) + " has zero length");
    }
  }
  struct Cell {
    double value = 0.0;
    std::size_t length = 0;
  };
  constexpr double kTieTolerance = 1e-12;
  auto not_worse = [](const Cell& a, const Cell& b) {
    if (a.value > b.value + kTieTolerance) return true;
    if (a.value < b.value - kTieTolerance) return false;
    return a.length <= b.length;
  };
  const std::size_t width = budget_frames + 1;
  // best[i * width + c]: optimum over items i..k-1 with capacity c.
  std::vector<Cell> best((k + 1) * width);
  auto take_cell = [&](std::size_t i, std::size_t c) {
    const Cell& rest = best[(i + 1) * width + (c - lengths[i])];
    return Cell{values[i] + rest.value, lengths[i] + rest.length};
  };
  for (std::size_t i = k; i-- > 0;) {
    for (std::size_t c = 0; c <= budget_frames; ++c) {
      const Cell& skip = best[(i + 1) * width + c];
      Cell chosen = skip;
      if (lengths[i] <= c) {
        const Cell take = take_cell(i, c);
        if (not_worse(take, skip)) chosen = take;
      }
      best[i * width + c] = chosen;
    }
  }
  std::vector<std::size_t> picked;
  std::size_t c = budget_frames;
  for (std::size_t i = 0; i < k; ++i) {
    if (lengths[i] > c) continue;
    if (not_worse(take_cell(i, c), best[(i + 1) * width + c])) {
      picked.push_back(i);
      c -= lengths[i];
    }
  }
  return picked;
}

inline std::vector<std::size_t> ShotLengths(const SegmentList& shots) {
  std::vector<std::size_t> out;
  out.reserve(shots.size());
  for (const Segment& s : shots) out.push_back(s.length());
  return out;
}

inline SummaryMask SummarizeScores(std::span<const double> frame_scores,
                                   const SegmentList& shots,
                                   double budget = kDefaultBudget) {
  const std::size_t n = frame_scores.size();
  SummaryMask out;
  out.shots = shots;
  out.budget_frames = BudgetFrames(budget, n);
  const std::vector<double> values = ShotScores(frame_scores, shots);
  const std::vector<std::size_t> lengths = ShotLengths(shots);
  out.selected_shots = KnapsackSelect(values, lengths, out.budget_frames);
  out.selected = MaskFromSegments(shots, out.selected_shots, n);
  return out;
}

inline SummaryMask GenerateSummary(const ModelParameters& model,
                                   const Matrix& features,
                                   const SegmentList& shots,
                                   double budget = kDefaultBudget) {
  const std::vector<double> scores = FrameScores(model, features);
  return SummarizeScores(scores, shots, budget);
}

// Baseline: shots visited in random order, each kept if it still fits.
inline SummaryMask RandomShotSummary(const SegmentList& shots, std::size_t n,
                                     double budget, Rng& rng) {
  ValidatePartition(shots, n);
  SummaryMask out;
  out.shots = shots;
  out.budget_frames = BudgetFrames(budget, n);
  std::vector<std::size_t> order(shots.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  std::size_t used = 0;
  for (std::size_t s : order) {
    if (used + shots[s].length() <= out.budget_frames) {
      out.selected_shots.push_back(s);
      used += shots[s].length();
    }
  }
  std::sort(out.selected_shots.begin(), out.selected_shots.end());
  out.selected = MaskFromSegments(shots, out.selected_shots, n);
  return out;
}

}  // namespace actsum

#endif  // ACTSUM_SUMMARY_HPP_
