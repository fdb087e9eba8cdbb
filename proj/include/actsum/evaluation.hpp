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

// Measurement: keyshot f1 against reference summaries, inter-annotator
// agreement on actionness scales, scale histograms and classification
// accuracy against the majority-class baseline.

#ifndef ACTSUM_EVALUATION_HPP_
#define ACTSUM_EVALUATION_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "actsum/error.hpp"
#include "actsum/labels.hpp"
#include "actsum/mask.hpp"

namespace actsum {

using ScaleDistribution = std::array<double, ActionnessRank::kNumScales>;

enum class CombineMode { kAverage, kMax };

struct EvalReport {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::vector<double> per_user_f1;
  std::optional<ScaleDistribution> summary_distribution;
  std::optional<ScaleDistribution> video_distribution;
  std::optional<double> accuracy;
  std::optional<double> chance;
};

inline EvalReport KeyshotF1(const FrameMask& predicted,
                            std::span<const FrameMask> references,
                            CombineMode mode = CombineMode::kAverage) {
  if (references.empty()) {
    throw Error(ErrorCode::kEmptyAnnotations, "no reference summaries");
  }
  EvalReport report;
  std::size_t best = 0;
  for (std::size_t u = 0; u < references.size(); ++u) {
    const F1Score s = MaskF1(predicted, references[u]);
    report.per_user_f1.push_back(s.f1);
    if (mode == CombineMode::kAverage) {
      report.f1 += s.f1;
      report.precision += s.precision;
      report.recall += s.recall;
    } else if (u == 0 || s.f1 > report.per_user_f1[best]) {
      best = u;
      report.f1 = s.f1;
      report.precision = s.precision;
      report.recall = s.recall;
    }
  }
  if (mode == CombineMode::kAverage) {
    const double k = static_cast<double>(references.size());
    report.f1 /= k;
    report.precision /= k;
    report.recall /= k;
  }
  return report;
}

struct ConsensusReport {
  // Mean pairwise f1 per scale; empty when no pair had a nonempty mask.
  std::array<std::optional<double>, ActionnessRank::kNumScales> per_scale;
  double overall = 0.0;
};

namespace detail {

inline FrameMask ScaleMask(const UserAnnotation& user,
                           const SegmentList& segments, int scale) {
  std::vector<std::size_t> chosen;
  for (std::size_t s = 0; s < segments.size(); ++s)
    if (user.segment_ranks[s].value() == scale) chosen.push_back(s);
  return MaskFromSegments(segments, chosen, segments.back().end);
}

}  // namespace detail

// For each scale and user pair, frame-level f1 between the two users'
// "ranked at this scale" masks; pairs where both are empty are skipped. Scales
// average over pairs, the overall value over scales with a counted pair.
inline ConsensusReport PairwiseConsensusF1(const AnnotationSet& annotations) {
  if (annotations.users.size() < 2) {
    throw Error(ErrorCode::kTooFewUsers,
                "consensus needs at least two annotators");
  }
  annotations.validate();
  const auto& users = annotations.users;
  ConsensusReport report;
  double scale_total = 0.0;
  int scales_counted = 0;
  for (int scale = 0; scale < ActionnessRank::kNumScales; ++scale) {
    std::vector<FrameMask> masks;
    for (const UserAnnotation& u : users)
      masks.push_back(detail::ScaleMask(u, annotations.segments, scale));
    double acc = 0.0;
    int pairs = 0;
    for (std::size_t a = 0; a < users.size(); ++a) {
      for (std::size_t b = a + 1; b < users.size(); ++b) {
        if (CountSelected(masks[a]) == 0 && CountSelected(masks[b]) == 0)
          continue;
        acc += MaskF1(masks[a], masks[b]).f1;
        ++pairs;
      }
    }
    if (pairs > 0) {
      report.per_scale[static_cast<std::size_t>(scale)] = acc / pairs;
      scale_total += acc / pairs;
      ++scales_counted;
    }
  }
  report.overall = scales_counted > 0 ? scale_total / scales_counted : 0.0;
  return report;
}

enum class RankWeighting { kFrames, kSegments };

// Per-user share of each scale, weighted by segment length by default.
inline std::vector<ScaleDistribution> RankFrequency(
    const AnnotationSet& annotations,
    RankWeighting weighting = RankWeighting::kFrames) {
  annotations.validate();
  std::vector<ScaleDistribution> out;
  for (const UserAnnotation& u : annotations.users) {
    ScaleDistribution h{};
    double total = 0.0;
    for (std::size_t s = 0; s < annotations.segments.size(); ++s) {
      const double w =
          weighting == RankWeighting::kFrames
              ? static_cast<double>(annotations.segments[s].length())
              : 1.0;
      h[static_cast<std::size_t>(u.segment_ranks[s].value())] += w;
      total += w;
    }
    for (double& v : h) v /= total;
    out.push_back(h);
  }
  return out;
}

// Share of each scale among the selected frames; no mask means every frame.
inline ScaleDistribution ActionnessDistribution(
    std::span<const ActionnessRank> frame_ranks,
    const FrameMask* mask = nullptr) {
  if (mask != nullptr && mask->size() != frame_ranks.size()) {
    throw Error(ErrorCode::kLengthMismatch, "mask and rank lengths differ");
  }
  ScaleDistribution h{};
  std::size_t count = 0;
  for (std::size_t i = 0; i < frame_ranks.size(); ++i) {
    if (mask != nullptr && !(*mask)[i]) continue;
    h[static_cast<std::size_t>(frame_ranks[i].value())] += 1.0;
    ++count;
  }
  if (count == 0) {
    throw Error(ErrorCode::kEmptySelection, "no frames selected");
  }
  for (double& v : h) v /= static_cast<double>(count);
  return h;
}

struct AccuracyReport {
  double accuracy = 0.0;
  double chance = 0.0;  // frequency of the most common oracle class
};

inline AccuracyReport ActionnessAccuracy(
    std::span<const ActionnessRank> predicted,
    std::span<const ActionnessRank> oracle) {
  if (predicted.size() != oracle.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(predicted.size()) + " predictions for " +
                    std::to_string(oracle.size()) + " labels");
  }
  if (oracle.empty()) throw Error(ErrorCode::kEmptySelection, "no frames");
  std::array<std::size_t, ActionnessRank::kNumScales> counts{};
  std::size_t hits = 0;
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    hits += predicted[i] == oracle[i] ? 1 : 0;
    ++counts[static_cast<std::size_t>(oracle[i].value())];
  }
  const double n = static_cast<double>(oracle.size());
  return {static_cast<double>(hits) / n,
          static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
              n};
}

// Argmax of each probability row; ties go to the lower scale.
template <typename ProbabilityMatrix>
std::vector<ActionnessRank> PredictRanks(const ProbabilityMatrix& p) {
  std::vector<ActionnessRank> out;
  out.reserve(p.rows());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    int best = 0;
    for (int j = 1; j < ActionnessRank::kNumScales; ++j)
      if (p(i, static_cast<std::size_t>(j)) > p(i, static_cast<std::size_t>(best)))
        best = j;
    out.emplace_back(best);
  }
  return out;
}

}  // namespace actsum

#endif  // ACTSUM_EVALUATION_HPP_
