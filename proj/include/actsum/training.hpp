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

// Adam over the flattened parameter vector, one video per step, with
// early stopping on validation keyshot f1.

#ifndef ACTSUM_TRAINING_HPP_
#define ACTSUM_TRAINING_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "actsum/error.hpp"
#include "actsum/evaluation.hpp"
#include "actsum/labels.hpp"
#include "actsum/model.hpp"
#include "actsum/random.hpp"
#include "actsum/summary.hpp"

namespace actsum {

struct TrainConfig {
  double lambda = 0.003;
  double learning_rate = 0.001;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  double val_ratio = 0.2;
  double budget = kDefaultBudget;
  std::uint64_t seed = 0;
  SubsetMode subset_mode = SubsetMode::kStochastic;
  SmoothingOptions smoothing;
  double kts_penalty = 1.0;
  // Global gradient-norm clip before each Adam step; 0 disables.
  double grad_clip = 5.0;
  bool normalize_actionness = false;
  std::size_t hidden = 256;
  std::size_t head_hidden = 256;
  std::size_t phi_dim = 256;

  void validate() const {
    auto fail = [](const std::string& what) {
      throw Error(ErrorCode::kInvalidArgument, what);
    };
    if (!(val_ratio > 0.0 && val_ratio < 1.0)) fail("val_ratio must be in (0, 1)");
    if (!(budget > 0.0 && budget <= 1.0)) fail("budget must be in (0, 1]");
    if (patience < 1) fail("patience must be >= 1");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be >= 0");
    if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
    if (!(grad_clip >= 0.0)) fail("grad_clip must be >= 0");
    if (!(smoothing.sigma_divisor > 0.0)) fail("sigma_divisor must be > 0");
    if (!(kts_penalty >= 0.0)) fail("kts_penalty must be >= 0");
    if (hidden == 0 || head_hidden == 0 || phi_dim == 0) {
      fail("layer widths must be positive");
    }
  }

  ModelDims model_dims(std::size_t input_dim) const {
    return {input_dim, hidden, head_hidden, phi_dim};
  }

  LossOptions loss_options() const { return {lambda, normalize_actionness}; }
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  explicit AdamState(std::size_t size = 0) : m(size, 0.0), v(size, 0.0) {}
};

// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps), with bias-corrected
// moments. Updates theta and state in place.
inline void AdamStep(std::span<double> theta, std::span<const double> grad,
                     AdamState& state, double lr) {
  if (theta.size() != grad.size() || state.m.size() != theta.size() ||
      state.v.size() != theta.size()) {
    throw Error(ErrorCode::kShapeMismatch, "Adam vectors differ in length");
  }
  if (!(lr > 0.0)) throw Error(ErrorCode::kInvalidArgument, "lr must be > 0");
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "gradient coordinate " + std::to_string(i));
    }
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    theta[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

// Rescales g in place so that ||g|| <= max_norm; returns the original norm.
inline double ClipGradientNorm(std::span<double> g, double max_norm) {
  const double norm = Norm2(g);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (double& v : g) v *= s;
  }
  return norm;
}

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Seeded shuffle; the first ceil(ratio * count) indices go to validation.
// Both halves are returned in ascending order.
inline DatasetSplit SplitValidation(std::size_t count, double ratio,
                                    std::uint64_t seed) {
  if (count == 0) throw Error(ErrorCode::kEmptyDataset, "no videos to split");
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ratio must be in (0, 1)");
  }
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_val = static_cast<std::size_t>(
      std::ceil(ratio * static_cast<double>(count) - 1e-9));
  DatasetSplit split;
  split.validation.assign(order.begin(),
                          order.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val),
                     order.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

// A video ready for training or evaluation.
struct Video {
  std::string id;
  Matrix features;
  AnnotationSet annotations;
  OracleLabels labels;

  const SegmentList& segments() const { return annotations.segments; }

  std::vector<FrameMask> user_summaries() const {
    std::vector<FrameMask> out;
    for (const UserAnnotation& u : annotations.users) out.push_back(u.summary);
    return out;
  }
};

inline Video MakeVideo(std::string id, Matrix features,
                       AnnotationSet annotations,
                       SmoothingOptions smoothing = {}) {
  if (features.rows() != annotations.n_frames) {
    throw Error(ErrorCode::kLengthMismatch,
                "video " + id + ": " + std::to_string(features.rows()) +
                    " feature rows vs " +
                    std::to_string(annotations.n_frames) + " annotated frames");
  }
  OracleLabels labels = BuildOracleLabels(annotations, smoothing);
  return {std::move(id), std::move(features), std::move(annotations),
          std::move(labels)};
}

// Mean keyshot f1 of the model's summaries against each video's users.
inline double MeanKeyshotF1(const ModelParameters& model,
                            std::span<const Video> videos, double budget,
                            CombineMode mode = CombineMode::kAverage) {
  if (videos.empty()) return 0.0;
  double acc = 0.0;
  for (const Video& v : videos) {
    const SummaryMask s = GenerateSummary(model, v.features, v.segments(), budget);
    acc += KeyshotF1(s.selected, v.user_summaries(), mode).f1;
  }
  return acc / static_cast<double>(videos.size());
}

// Tracks the best validation score; signals a stop once `patience`
// consecutive epochs fail to improve on it.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Returns true when training should stop after this epoch.
  bool update(double score) {
    ++epoch_;
    if (epoch_ == 1 || score > best_score_) {
      best_score_ = score;
      best_epoch_ = epoch_;
      stale_ = 0;
      return false;
    }
    ++stale_;
    return stale_ >= patience_;
  }

  bool improved_last() const noexcept { return best_epoch_ == epoch_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best_score() const noexcept { return best_score_; }
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t stale_ = 0;
  double best_score_ = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double summarization = 0.0;
  double regularizer = 0.0;
  double joint = 0.0;
  double validation_f1 = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t stopping_epoch = 0;
  std::size_t best_epoch = 0;
  double best_validation_f1 = 0.0;
};

struct TrainResult {
  ModelParameters params;
  TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

inline TrainResult Train(std::span<const Video> train_videos,
                         std::span<const Video> validation_videos,
                         const TrainConfig& config,
                         const EpochCallback& on_epoch = {}) {
  config.validate();
  if (train_videos.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no training videos");
  }
  const std::size_t input_dim = train_videos.front().features.cols();
  for (const Video& v : train_videos) {
    if (v.features.cols() != input_dim) {
      throw Error(ErrorCode::kShapeMismatch, "video " + v.id + " feature dim");
    }
  }
  ModelParameters params =
      ModelParameters::Initialize(config.model_dims(input_dim), config.seed);
  std::vector<double> theta = params.flatten();
  AdamState adam(theta.size());
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const LossOptions loss_options = config.loss_options();

  TrainResult result{params, {}};
  EarlyStopping stopper(config.patience);
  std::vector<std::size_t> order(train_videos.size());

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(std::span<std::size_t>(order));

    EpochRecord record;
    record.epoch = epoch;
    for (std::size_t idx : order) {
      const Video& video = train_videos[idx];
      TrainingTargets targets;
      targets.subset = SampleTrainingSubset(video.labels.smoothed,
                                            video.segments(), rng,
                                            config.subset_mode);
      targets.frame_ranks = video.labels.frame_ranks;
      LossAndGradient lg;
      try {
        lg = ModelBackward(params, video.features, targets, loss_options);
      } catch (const Error& e) {
        throw Error(e.code(), "epoch " + std::to_string(epoch) + ", video " +
                                  video.id + ": " + e.what());
      }
      std::vector<double> grad = lg.gradient.flatten();
      ClipGradientNorm(grad, config.grad_clip);
      AdamStep(theta, grad, adam, config.learning_rate);
      params.unflatten(theta);
      record.summarization += lg.loss.summarization;
      record.regularizer += lg.loss.regularizer;
      record.joint += lg.loss.joint;
    }
    const double k = static_cast<double>(order.size());
    record.summarization /= k;
    record.regularizer /= k;
    record.joint /= k;
    record.validation_f1 =
        MeanKeyshotF1(params, validation_videos, config.budget);
    record.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - started)
                         .count();
    result.history.epochs.push_back(record);
    if (on_epoch) on_epoch(record);

    const bool stop = stopper.update(record.validation_f1);
    if (stopper.improved_last()) result.params = params;
    result.history.stopping_epoch = epoch;
    if (stop) break;
  }
  result.history.best_epoch = stopper.best_epoch();
  result.history.best_validation_f1 = stopper.best_score();
  return result;
}

// Splits `dataset` with the run seed and trains on the larger part.
inline TrainResult TrainWithSplit(std::span<const Video> dataset,
                                  const TrainConfig& config,
                                  const EpochCallback& on_epoch = {},
                                  DatasetSplit* split_out = nullptr) {
  config.validate();
  const DatasetSplit split =
      SplitValidation(dataset.size(), config.val_ratio, config.seed);
  std::vector<Video> train, val;
  for (std::size_t i : split.train) train.push_back(dataset[i]);
  for (std::size_t i : split.validation) val.push_back(dataset[i]);
  if (split_out != nullptr) *split_out = split;
  return Train(train, val, config, on_epoch);
}

}  // namespace actsum

#endif  // ACTSUM_TRAINING_HPP_
