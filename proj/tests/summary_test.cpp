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

#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "actsum/summary.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace actsum {
namespace {

using testing::Choice;
using testing::ExhaustiveKnapsack;
using testing::SegmentsFromLengths;

double ValueOf(const std::vector<double>& values,
               const std::vector<std::size_t>& set) {
  double v = 0.0;
  for (std::size_t i : set) v += values[i];
  return v;
}

TEST(KnapsackSelect, HandTieCase) {
  const std::vector<double> values = {3, 2, 2};
  const std::vector<std::size_t> lengths = {5, 5, 5};
  EXPECT_EQ(KnapsackSelect(values, lengths, 10),
            (std::vector<std::size_t>{0, 1}));
}

TEST(KnapsackSelect, EverythingFits) {
  const std::vector<double> values = {0.1, 0.9, 0.4};
  const std::vector<std::size_t> lengths = {2, 3, 4};
  EXPECT_EQ(KnapsackSelect(values, lengths, 9),
            (std::vector<std::size_t>{0, 1, 2}));
}

TEST(KnapsackSelect, ZeroBudgetSelectsNothing) {
  const std::vector<double> values = {1.0};
  const std::vector<std::size_t> lengths = {1};
  EXPECT_TRUE(KnapsackSelect(values, lengths, 0).empty());
  EXPECT_TRUE(KnapsackSelect({}, {}, 5).empty());
}

TEST(KnapsackSelect, PrefersShorterOnValueTie) {
  const std::vector<double> values = {1.0, 1.0};
  const std::vector<std::size_t> lengths = {4, 2};
  EXPECT_EQ(KnapsackSelect(values, lengths, 4), (std::vector<std::size_t>{1}));
}

TEST(KnapsackSelect, RejectsZeroLength) {
  const std::vector<double> values = {1.0};
  const std::vector<std::size_t> lengths = {0};
  EXPECT_THROW(KnapsackSelect(values, lengths, 3), Error);
}

TEST(KnapsackSelect, MatchesExhaustiveOnRandomInstances) {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = rng.below(16);
    std::vector<double> values(k);
    std::vector<std::size_t> lengths(k);
    // Half the instances use small integer scores so ties are common.
    const bool integral = trial % 2 == 0;
    for (std::size_t i = 0; i < k; ++i) {
      values[i] = integral ? static_cast<double>(rng.below(4)) : rng.uniform();
      lengths[i] = 1 + rng.below(8);
    }
    const std::size_t budget = rng.below(30);
    const auto got = KnapsackSelect(values, lengths, budget);
    const Choice want = ExhaustiveKnapsack(values, lengths, budget);
    EXPECT_NEAR(ValueOf(values, got), want.value, 1e-12);
    EXPECT_EQ(got, want.set) << "trial " << trial;
  }
}

TEST(BudgetFrames, FloorOfFraction) {
  EXPECT_EQ(BudgetFrames(0.15, 60), 9u);
  EXPECT_EQ(BudgetFrames(0.15, 100), 15u);
  EXPECT_EQ(BudgetFrames(0.15, 99), 14u);
  EXPECT_EQ(BudgetFrames(1.0, 7), 7u);
  EXPECT_EQ(BudgetFrames(0.0, 7), 0u);
  EXPECT_THROW(BudgetFrames(1.5, 7), Error);
}

TEST(ShotScores, MeanOverFrames) {
  const std::vector<double> scores = {0.2, 0.4, 1.0, 0.0, 0.5};
  const auto s = ShotScores(scores, SegmentsFromLengths({2, 3}));
  EXPECT_NEAR(s[0], 0.3, 1e-15);
  EXPECT_NEAR(s[1], 0.5, 1e-15);
}

TEST(SummarizeScores, BudgetExtremes) {
  const std::vector<double> scores = {0.1, 0.3, 0.2, 0.9, 0.8, 0.1};
  const SegmentList shots = SegmentsFromLengths({2, 2, 2});
  const SummaryMask all = SummarizeScores(scores, shots, 1.0);
  EXPECT_EQ(CountSelected(all.selected), 6u);
  const SummaryMask none = SummarizeScores(scores, shots, 0.0);
  EXPECT_EQ(CountSelected(none.selected), 0u);
}

TEST(SummarizeScores, DominantShotIsSelected) {
  const SegmentList shots = SegmentsFromLengths({8, 5, 7, 10});
  std::vector<double> scores(30, 0.1);
  for (std::size_t f = 8; f < 13; ++f) scores[f] = 0.9;
  const SummaryMask m = SummarizeScores(scores, shots, 0.2);
  EXPECT_EQ(m.selected_shots, (std::vector<std::size_t>{1}));
}

TEST(SummarizeScores, RespectsBudgetAndShotClosure) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> lengths(1 + rng.below(12));
    for (auto& l : lengths) l = 1 + rng.below(15);
    const SegmentList shots = SegmentsFromLengths(lengths);
    const std::size_t n = shots.back().end;
    std::vector<double> scores(n);
    for (double& v : scores) v = rng.uniform();
    const SummaryMask m = SummarizeScores(scores, shots);
    EXPECT_LE(CountSelected(m.selected), BudgetFrames(kDefaultBudget, n));
    for (const Segment& s : shots) {
      std::size_t on = 0;
      for (std::size_t f = s.start; f < s.end; ++f) on += m.selected[f];
      EXPECT_TRUE(on == 0 || on == s.length());
    }
  }
}

TEST(KnapsackSelect, RaisingSelectedScoreKeepsIt) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + rng.below(10);
    std::vector<double> values(k);
    std::vector<std::size_t> lengths(k);
    for (std::size_t i = 0; i < k; ++i) {
      values[i] = rng.uniform();
      lengths[i] = 1 + rng.below(6);
    }
    const std::size_t budget = rng.below(20);
    const auto picked = KnapsackSelect(values, lengths, budget);
    if (picked.empty()) continue;
    const std::size_t target = picked[rng.below(picked.size())];
    values[target] += rng.uniform(0.0, 1.0);
    const auto again = KnapsackSelect(values, lengths, budget);
    EXPECT_TRUE(std::find(again.begin(), again.end(), target) != again.end());
  }
}

TEST(RandomShotSummary, FitsBudgetAndIsSeeded) {
  const SegmentList shots = SegmentsFromLengths({3, 4, 5, 2, 6, 3, 7});
  Rng a(5);
  Rng b(5);
  const SummaryMask ma = RandomShotSummary(shots, 30, 0.3, a);
  const SummaryMask mb = RandomShotSummary(shots, 30, 0.3, b);
  EXPECT_EQ(ma.selected, mb.selected);
  EXPECT_LE(CountSelected(ma.selected), 9u);
  EXPECT_FALSE(ma.selected_shots.empty());
}

TEST(GenerateSummary, UsesQualityHead) {
  const ModelParameters params = ModelParameters::Initialize(testing::ToyDims(), 3);
  Rng rng(3);
  const Matrix features = testing::RandomMatrix(20, 6, rng);
  const SegmentList shots = SegmentsFromLengths({4, 6, 3, 7});
  const auto q = ModelForward(params, features).outputs.q;
  const SummaryMask direct = SummarizeScores(q, shots, 0.5);
  const SummaryMask via_model = GenerateSummary(params, features, shots, 0.5);
  EXPECT_EQ(direct.selected_shots, via_model.selected_shots);
}

}  // namespace
}  // namespace actsum
