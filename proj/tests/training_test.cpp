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

#include <cmath>
#include <set>
#include <vector>

#include "actsum/synthetic.hpp"
#include "actsum/training.hpp"
#include "test_support.hpp"

namespace actsum {
namespace {

// Independent scalar Adam used as the oracle.
struct ScalarAdam {
  double m = 0.0, v = 0.0;
  int t = 0;
  double step(double theta, double g, double lr) {
    ++t;
    m = 0.9 * m + (1.0 - 0.9) * g;
    v = 0.999 * v + (1.0 - 0.999) * g * g;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    return theta - lr * mh / (std::sqrt(vh) + 1e-8);
  }
};

TEST(AdamStep, ZeroGradientIsFixpoint) {
  std::vector<double> theta = {1.0, -2.0, 0.5};
  const std::vector<double> before = theta;
  AdamState state(3);
  AdamStep(theta, std::vector<double>(3, 0.0), state, 0.01);
  EXPECT_EQ(theta, before);
  EXPECT_EQ(state.t, 1u);
}

TEST(AdamStep, FirstStepIsSignTimesLearningRate) {
  const std::vector<double> g = {1e-3, -0.5, 3.0, -1e4};
  std::vector<double> theta(4, 0.0);
  AdamState state(4);
  const double lr = 0.001;
  AdamStep(theta, g, state, lr);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double expected = -lr * (g[i] > 0 ? 1.0 : -1.0);
    EXPECT_NEAR(theta[i], expected, 1e-6 * lr * 1e1) << i;
    EXPECT_NEAR(theta[i] / expected, 1.0, 1e-5);
  }
}

TEST(AdamStep, MatchesScalarOracle) {
  Rng rng(7);
  std::vector<double> theta(5);
  for (double& v : theta) v = rng.normal();
  std::vector<double> oracle_theta = theta;
  std::vector<ScalarAdam> oracle(5);
  AdamState state(5);
  for (int step = 0; step < 6; ++step) {
    std::vector<double> g(5);
    for (double& v : g) v = step < 2 ? 0.7 : rng.normal();
    AdamStep(theta, g, state, 0.01);
    for (std::size_t i = 0; i < 5; ++i)
      oracle_theta[i] = oracle[i].step(oracle_theta[i], g[i], 0.01);
    EXPECT_EQ(theta, oracle_theta) << "step " << step;
  }
}

TEST(AdamStep, RejectsNonFiniteGradient) {
  std::vector<double> theta(2, 0.0);
  AdamState state(2);
  try {
    AdamStep(theta, std::vector<double>{0.0, NAN}, state, 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteValue);
  }
}

TEST(ClipGradientNorm, ScalesOnlyWhenAboveThreshold) {
  std::vector<double> g = {3.0, 4.0};
  EXPECT_EQ(ClipGradientNorm(g, 10.0), 5.0);
  EXPECT_EQ(g, (std::vector<double>{3.0, 4.0}));
  ClipGradientNorm(g, 1.0);
  EXPECT_NEAR(g[0], 0.6, 1e-15);
  EXPECT_NEAR(g[1], 0.8, 1e-15);
  std::vector<double> h = {30.0, 40.0};
  ClipGradientNorm(h, 0.0);
  EXPECT_EQ(h[1], 40.0);
}

TEST(SplitValidation, CeilingAndDeterminism) {
  const DatasetSplit s = SplitValidation(5, 0.2, 1);
  EXPECT_EQ(s.validation.size(), 1u);
  EXPECT_EQ(s.train.size(), 4u);
  EXPECT_EQ(SplitValidation(11, 0.2, 1).validation.size(), 3u);
  const DatasetSplit again = SplitValidation(5, 0.2, 1);
  EXPECT_EQ(s.validation, again.validation);
  EXPECT_EQ(s.train, again.train);
}

TEST(SplitValidation, DisjointAndCovering) {
  Rng rng(31);
  for (std::size_t n = 1; n <= 50; ++n) {
    const double ratio = rng.uniform(0.05, 0.95);
    const DatasetSplit s = SplitValidation(n, ratio, rng.next());
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    for (std::size_t i : s.validation) EXPECT_TRUE(all.insert(i).second);
    EXPECT_EQ(all.size(), n);
    EXPECT_EQ(*all.rbegin(), n - 1);
    EXPECT_EQ(s.validation.size(),
              static_cast<std::size_t>(std::ceil(ratio * n - 1e-9)));
  }
}

TEST(SplitValidation, Errors) {
  try {
    SplitValidation(0, 0.2, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyDataset);
  }
  EXPECT_THROW(SplitValidation(4, 1.0, 1), Error);
}

TEST(EarlyStopping, PeakAtEpochThreeStopsAtEight) {
  const std::vector<double> scores = {0.1, 0.2, 0.5, 0.4, 0.45,
                                      0.3, 0.5, 0.2, 0.9};
  EarlyStopping stopper(5);
  std::size_t stopped_at = 0;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    if (stopper.update(scores[e])) {
      stopped_at = e + 1;
      break;
    }
  }
  EXPECT_EQ(stopped_at, 8u);
  EXPECT_EQ(stopper.best_epoch(), 3u);
  EXPECT_EQ(stopper.best_score(), 0.5);
}

std::vector<Video> SmallCorpus(std::size_t videos, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_videos = videos;
  spec.min_frames = 40;
  spec.max_frames = 50;
  spec.dim = 6;
  return ToVideos(GenerateSynthetic(spec, seed), {});
}

TrainConfig SmallConfig() {
  TrainConfig c;
  c.hidden = 5;
  c.head_hidden = 5;
  c.phi_dim = 5;
  c.max_epochs = 6;
  c.patience = 2;
  c.learning_rate = 0.01;
  c.seed = 99;
  c.budget = 0.3;
  return c;
}

TEST(Train, DeterministicForSameSeed) {
  const auto corpus = SmallCorpus(5, 4);
  const TrainConfig c = SmallConfig();
  const TrainResult a = TrainWithSplit(corpus, c);
  const TrainResult b = TrainWithSplit(corpus, c);
  EXPECT_EQ(a.params.flatten(), b.params.flatten());
  ASSERT_EQ(a.history.epochs.size(), b.history.epochs.size());
  for (std::size_t e = 0; e < a.history.epochs.size(); ++e)
    EXPECT_EQ(a.history.epochs[e].joint, b.history.epochs[e].joint);
}

TEST(Train, ReturnsBestValidationParameters) {
  const auto corpus = SmallCorpus(6, 8);
  TrainConfig c = SmallConfig();
  c.max_epochs = 10;
  DatasetSplit split;
  const TrainResult r = TrainWithSplit(corpus, c, {}, &split);
  std::vector<Video> val;
  for (std::size_t i : split.validation) val.push_back(corpus[i]);
  double best = 0.0;
  for (const auto& e : r.history.epochs) best = std::max(best, e.validation_f1);
  EXPECT_EQ(r.history.best_validation_f1, best);
  EXPECT_EQ(MeanKeyshotF1(r.params, val, c.budget), best);
  EXPECT_EQ(r.history.epochs[r.history.best_epoch - 1].validation_f1, best);
  EXPECT_LE(r.history.stopping_epoch, c.max_epochs);
}

TEST(Train, ZeroLambdaFreezesActionnessHead) {
  const auto corpus = SmallCorpus(4, 2);
  TrainConfig c = SmallConfig();
  c.lambda = 0.0;
  c.max_epochs = 3;
  c.patience = 10;
  const TrainResult r = TrainWithSplit(corpus, c);
  const ModelParameters init =
      ModelParameters::Initialize(c.model_dims(6), c.seed);
  EXPECT_EQ(r.params.heads.actionness.w1, init.heads.actionness.w1);
  EXPECT_EQ(r.params.heads.actionness.b1, init.heads.actionness.b1);
  EXPECT_EQ(r.params.heads.actionness.w2, init.heads.actionness.w2);
  EXPECT_EQ(r.params.heads.actionness.b2, init.heads.actionness.b2);
  EXPECT_NE(r.params.heads.quality.w1, init.heads.quality.w1);
}

TEST(Train, DeterministicSubsetDescendsOnSingleVideo) {
  const auto corpus = SmallCorpus(1, 5);
  TrainConfig c = SmallConfig();
  c.lambda = 0.0;
  c.learning_rate = 1e-4;
  c.subset_mode = SubsetMode::kDeterministic;
  c.grad_clip = 0.0;
  c.max_epochs = 30;
  c.patience = 1000;
  const TrainResult r = Train(corpus, corpus, c);
  ASSERT_EQ(r.history.epochs.size(), 30u);
  for (std::size_t e = 1; e < r.history.epochs.size(); ++e) {
    EXPECT_LE(r.history.epochs[e].joint, r.history.epochs[e - 1].joint)
        << "epoch " << e + 1;
  }
}

TEST(Train, RejectsBadConfigAndEmptyData) {
  TrainConfig c = SmallConfig();
  c.val_ratio = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = SmallConfig();
  c.patience = 0;
  EXPECT_THROW(c.validate(), Error);
  try {
    Train({}, {}, SmallConfig());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyDataset);
  }
}

}  // namespace
}  // namespace actsum
