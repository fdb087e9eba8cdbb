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

#ifndef ACTSUM_PIPELINE_HPP_
#define ACTSUM_PIPELINE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "actsum/evaluation.hpp"
#include "actsum/training.hpp"

namespace actsum {

// Everything measured when a trained model is run over a set of videos.
struct DatasetEvaluation {
  EvalReport report;            // mean keyshot f1 plus pooled distributions
  std::vector<double> per_video_f1;
  double random_baseline_f1 = 0.0;
  std::size_t videos = 0;
  std::size_t frames = 0;
};

struct EvaluationOptions {
  double budget = kDefaultBudget;
  CombineMode mode = CombineMode::kAverage;
  // Random-shot summaries averaged per video for the baseline; 0 skips it.
  std::size_t baseline_draws = 100;
  std::uint64_t seed = 0;
};

// Summarizes every video, scores it against its users, and pools the
// actionness predictions and oracle ranks over all frames. Summary and
// full-video distributions use the oracle ranks.
inline DatasetEvaluation EvaluateModel(const ModelParameters& model,
                                       std::span<const Video> videos,
                                       const EvaluationOptions& opts = {}) {
  if (videos.empty()) throw Error(ErrorCode::kEmptyDataset, "no videos");
  DatasetEvaluation out;
  out.videos = videos.size();
  Rng rng(opts.seed ^ 0x5851f42d4c957f2dULL);
  std::vector<ActionnessRank> predicted, oracle;
  FrameMask pooled_summary;
  EvalReport& r = out.report;
  for (const Video& v : videos) {
    const ForwardTrace trace = ModelForward(model, v.features);
    const SummaryMask s = SummarizeScores(trace.outputs.q, v.segments(), opts.budget);
    const std::vector<FrameMask> refs = v.user_summaries();
    const EvalReport one = KeyshotF1(s.selected, refs, opts.mode);
    r.f1 += one.f1;
    r.precision += one.precision;
    r.recall += one.recall;
    out.per_video_f1.push_back(one.f1);

    if (opts.baseline_draws > 0) {
      double acc = 0.0;
      for (std::size_t k = 0; k < opts.baseline_draws; ++k) {
        const SummaryMask random =
            RandomShotSummary(v.segments(), v.features.rows(), opts.budget, rng);
        acc += KeyshotF1(random.selected, refs, opts.mode).f1;
      }
      out.random_baseline_f1 += acc / static_cast<double>(opts.baseline_draws);
    }

    const std::vector<ActionnessRank> p = PredictRanks(trace.outputs.p);
    predicted.insert(predicted.end(), p.begin(), p.end());
    oracle.insert(oracle.end(), v.labels.frame_ranks.begin(),
                  v.labels.frame_ranks.end());
    pooled_summary.insert(pooled_summary.end(), s.selected.begin(),
                          s.selected.end());
  }
  const double k = static_cast<double>(videos.size());
  r.f1 /= k;
  r.precision /= k;
  r.recall /= k;
  out.random_baseline_f1 /= k;
  out.frames = oracle.size();
  const AccuracyReport acc = ActionnessAccuracy(predicted, oracle);
  r.accuracy = acc.accuracy;
  r.chance = acc.chance;
  r.video_distribution = ActionnessDistribution(oracle);
  if (CountSelected(pooled_summary) > 0)
    r.summary_distribution = ActionnessDistribution(oracle, &pooled_summary);
  return out;
}

}  // namespace actsum

#endif  // ACTSUM_PIPELINE_HPP_
