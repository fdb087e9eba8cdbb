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
#include <cmath>
#include <limits>
#include <vector>

#include "actsum/segmentation.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace actsum {
namespace {

using testing::BruteForceKts;
using testing::BruteForceResult;
using testing::FromBoundaries;
using testing::RandomMatrix;

TEST(SegmentCost, HandCases) {
  const Matrix ones = {{1.0, 1.0}, {1.0, 1.0}};
  EXPECT_EQ(SegmentCost(ones, 0, 1), 0.0);
  EXPECT_EQ(SegmentCost(ones, 0, 2), 0.0);
  EXPECT_EQ(SegmentCost(Matrix::Identity(2), 0, 2), 1.0);
}

TEST(SegmentCost, RejectsBadRanges) {
  const Matrix k = Matrix::Identity(3);
  for (auto [s, e] : {std::pair<std::size_t, std::size_t>{2, 2}, {0, 4}, {3, 1}}) {
    try {
      SegmentCost(k, s, e);
      FAIL();
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), ErrorCode::kIndexOutOfRange);
    }
  }
}

TEST(SegmentCost, PrefixTableMatchesDirectSum) {
  Rng rng(4);
  const Matrix k = NormalizedGram(RandomMatrix(15, 5, rng));
  const ScatterTable table(k);
  for (std::size_t s = 0; s < 15; ++s)
    for (std::size_t e = s + 1; e <= 15; ++e) {
      EXPECT_NEAR(table.cost(s, e), SegmentCost(k, s, e), 1e-10);
      EXPECT_GE(SegmentCost(k, s, e), -1e-9);
    }
}

TEST(Kts, ConstantFeaturesGiveOneSegment) {
  Matrix x(20, 4, 0.0);
  for (std::size_t i = 0; i < 20; ++i) x(i, 1) = 2.0;
  const SegmentList s = KtsSegment(x, {5, 1.0});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0], (Segment{0, 20}));
}

TEST(Kts, SplitsTwoOrthogonalBlocks) {
  Matrix x(6, 2);
  for (std::size_t i = 0; i < 3; ++i) x(i, 0) = 1.0;
  for (std::size_t i = 3; i < 6; ++i) x(i, 1) = 1.0;
  const SegmentList s = KtsSegment(x, {2, 0.0});
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0], (Segment{0, 3}));
  EXPECT_EQ(s[1], (Segment{3, 6}));
}

TEST(Kts, MatchesExhaustiveEnumeration) {
  Rng rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    const std::size_t max_m = 1 + rng.below(4);
    const double penalty = trial % 3 == 0 ? 0.0 : rng.uniform(0.0, 0.5);
    const Matrix kernel = NormalizedGram(RandomMatrix(n, 3, rng));
    const SegmentList dp = KtsSegmentKernel(kernel, {max_m, penalty});
    const BruteForceResult bf = BruteForceKts(kernel, max_m, penalty);
    EXPECT_NEAR(KtsObjective(kernel, dp, penalty), bf.objective, 1e-9)
        << "trial " << trial;
    EXPECT_EQ(dp, bf.segments) << "trial " << trial;
  }
}

TEST(Kts, TiesPreferFewerSegmentsThenEarliestBoundaries) {
  // Identical frames: every partition has zero scatter, so with no penalty
  // the single segment wins.
  const Matrix kernel(5, 5, 1.0);
  const SegmentList s = KtsSegmentKernel(kernel, {3, 0.0});
  ASSERT_EQ(s.size(), 1u);

  // Three blocks A A B B A A with max two segments: [0,2)|[2,6) and
  // [0,4)|[4,6) tie on scatter; the earlier boundary wins.
  Matrix x(6, 2);
  for (std::size_t i : {0u, 1u, 4u, 5u}) x(i, 0) = 1.0;
  for (std::size_t i : {2u, 3u}) x(i, 1) = 1.0;
  const SegmentList t = KtsSegment(x, {2, 0.0});
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0], (Segment{0, 2}));
}

TEST(Kts, ObjectiveNonIncreasingInMaxSegments) {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix kernel = NormalizedGram(RandomMatrix(30, 4, rng));
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t m = 1; m <= 8; ++m) {
      const double obj = KtsObjective(kernel, KtsSegmentKernel(kernel, {m, 0.0}), 0.0);
      EXPECT_LE(obj, prev + 1e-9);
      prev = obj;
    }
  }
}

TEST(Kts, InvariantToFeaturePermutation) {
  Rng rng(12);
  const Matrix x = RandomMatrix(25, 6, rng);
  const std::vector<std::size_t> perm = {3, 0, 5, 1, 4, 2};
  Matrix y(25, 6);
  for (std::size_t i = 0; i < 25; ++i)
    for (std::size_t k = 0; k < 6; ++k) y(i, k) = x(i, perm[k]);
  EXPECT_EQ(KtsSegment(x, {5, 0.1}), KtsSegment(y, {5, 0.1}));
}

TEST(Kts, OutputIsAlwaysAPartition) {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    const Matrix x = RandomMatrix(n, 3, rng);
    EXPECT_NO_THROW(ValidatePartition(KtsSegment(x), n));
  }
}

TEST(Kts, DefaultCapIsOneSegmentPerTenFrames) {
  Rng rng(14);
  const Matrix x = RandomMatrix(35, 8, rng);
  EXPECT_LE(KtsSegment(x, {0, 0.0}).size(), 4u);
}

TEST(Kts, EmptyInputIsRejected) {
  try {
    KtsSegment(Matrix(0, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
}

TEST(Partition, ValidationCatchesGapsAndOverlaps) {
  EXPECT_NO_THROW(ValidatePartition({{0, 2}, {2, 5}}, 5));
  EXPECT_THROW(ValidatePartition({{0, 2}, {3, 5}}, 5), Error);
  EXPECT_THROW(ValidatePartition({{0, 3}, {2, 5}}, 5), Error);
  EXPECT_THROW(ValidatePartition({{0, 2}, {2, 4}}, 5), Error);
  EXPECT_THROW(ValidatePartition({{1, 5}}, 5), Error);
  EXPECT_THROW(ValidatePartition({}, 5), Error);
}

}  // namespace
}  // namespace actsum
