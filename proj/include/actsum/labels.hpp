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

// Training targets built from several annotators: a greedy consensus summary,
// per-segment actionness ranks, Gaussian-smoothed importance and the DPP
// target subsets drawn from it.

#ifndef ACTSUM_LABELS_HPP_
#define ACTSUM_LABELS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "actsum/error.hpp"
#include "actsum/mask.hpp"
#include "actsum/random.hpp"
#include "actsum/segmentation.hpp"

namespace actsum {

// Actionness scale: 0 no action, 1 background action, 2 partial foreground
// action, 3 active foreground action.
class ActionnessRank {
 public:
  static constexpr int kNumScales = 4;

  constexpr ActionnessRank() = default;
  constexpr explicit ActionnessRank(int value) : value_(Check(value)) {}

  constexpr int value() const noexcept { return value_; }
  friend constexpr auto operator<=>(ActionnessRank, ActionnessRank) = default;

 private:
  static constexpr std::uint8_t Check(int v) {
    if (v < 0 || v >= kNumScales) {
      throw Error(ErrorCode::kInvalidArgument,
                  "actionness rank " + std::to_string(v) + " outside 0..3");
    }
    return static_cast<std::uint8_t>(v);
  }

  std::uint8_t value_ = 0;
};

struct UserAnnotation {
  FrameMask summary;
  std::vector<ActionnessRank> segment_ranks;
};

// One video's annotations; every user is aligned to `segments`.
struct AnnotationSet {
  std::string video_id;
  std::size_t n_frames = 0;
  SegmentList segments;
  std::vector<UserAnnotation> users;

  void validate() const {
    ValidatePartition(segments, n_frames);
    for (std::size_t u = 0; u < users.size(); ++u) {
      if (users[u].summary.size() != n_frames) {
        throw Error(ErrorCode::kLengthMismatch,
                    "user " + std::to_string(u) + " summary length " +
                        std::to_string(users[u].summary.size()) + " != " +
                        std::to_string(n_frames));
      }
      if (users[u].segment_ranks.size() != segments.size()) {
        throw Error(ErrorCode::kLengthMismatch,
                    "user " + std::to_string(u) + " has " +
                        std::to_string(users[u].segment_ranks.size()) +
                        " ranks for " + std::to_string(segments.size()) +
                        " segments");
      }
    }
  }
};

struct OracleLabels {
  FrameMask summary_mask;
  std::vector<double> smoothed;
  std::vector<ActionnessRank> segment_ranks;
  std::vector<ActionnessRank> frame_ranks;
};

struct OracleTrace {
  FrameMask mask;
  std::vector<std::size_t> picked;  // segment indices in pick order
  std::vector<double> mean_f1;      // mean f1 after each pick (index 0: empty)
};

// Greedy consensus: repeatedly add the whole segment with the largest gain in
// mean-over-users f1, stopping at the first non-positive gain. Ties go to the
// earliest segment.
inline OracleTrace OracleSummaryTrace(std::span<const UserAnnotation> users,
                                      const SegmentList& segments) {
  if (users.empty()) {
    throw Error(ErrorCode::kEmptyAnnotations, "no user annotations");
  }
  const std::size_t n = users.front().summary.size();
  ValidatePartition(segments, n);
  const std::size_t n_users = users.size();
  const std::size_t n_segs = segments.size();

  std::vector<std::size_t> ref_size(n_users);
  std::vector<std::vector<std::size_t>> seg_overlap(
      n_users, std::vector<std::size_t>(n_segs, 0));
  for (std::size_t u = 0; u < n_users; ++u) {
    if (users[u].summary.size() != n) {
      throw Error(ErrorCode::kLengthMismatch, "user summaries differ in length");
    }
    ref_size[u] = CountSelected(users[u].summary);
    for (std::size_t s = 0; s < n_segs; ++s)
      for (std::size_t f = segments[s].start; f < segments[s].end; ++f)
        seg_overlap[u][s] += users[u].summary[f] ? 1 : 0;
  }

  std::vector<std::size_t> overlap(n_users, 0);
  std::size_t predicted = 0;
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  // Mean f1 of the current selection, optionally extended by segment `seg`.
  auto mean_f1 = [&](std::size_t seg) {
    const std::size_t extra = seg == kNone ? 0 : segments[seg].length();
    double acc = 0.0;
    for (std::size_t u = 0; u < n_users; ++u) {
      const std::size_t o =
          overlap[u] + (seg == kNone ? 0 : seg_overlap[u][seg]);
      acc += F1FromCounts(o, predicted + extra, ref_size[u]).f1;
    }
    return acc / static_cast<double>(n_users);
  };

  OracleTrace trace;
  trace.mask.assign(n, false);
  std::vector<bool> taken(n_segs, false);
  double current = mean_f1(kNone);
  trace.mean_f1.push_back(current);
  constexpr double kMinGain = 1e-12;
  while (true) {
    std::size_t best = n_segs;
    double best_value = current + kMinGain;
    for (std::size_t s = 0; s < n_segs; ++s) {
      if (taken[s]) continue;
      const double value = mean_f1(s);
      if (value > best_value + (best == n_segs ? 0.0 : kMinGain)) {
        best = s;
        best_value = value;
      }
    }
    if (best == n_segs) break;
    taken[best] = true;
    predicted += segments[best].length();
    for (std::size_t u = 0; u < n_users; ++u) overlap[u] += seg_overlap[u][best];
    for (std::size_t f = segments[best].start; f < segments[best].end; ++f)
      trace.mask[f] = true;
    trace.picked.push_back(best);
    current = best_value;
    trace.mean_f1.push_back(current);
  }
  return trace;
}

inline FrameMask OracleSummary(std::span<const UserAnnotation> users,
                               const SegmentList& segments) {
  return OracleSummaryTrace(users, segments).mask;
}

// Per-segment median of user ranks; an even count averages the two middle
// ranks and rounds down.
inline std::vector<ActionnessRank> OracleActionness(
    std::span<const UserAnnotation> users) {
  if (users.empty()) {
    throw Error(ErrorCode::kEmptyAnnotations, "no user annotations");
  }
  const std::size_t n_segs = users.front().segment_ranks.size();
  std::vector<ActionnessRank> out;
  out.reserve(n_segs);
  std::vector<int> column(users.size());
  for (std::size_t s = 0; s < n_segs; ++s) {
    for (std::size_t u = 0; u < users.size(); ++u) {
      if (users[u].segment_ranks.size() != n_segs) {
        throw Error(ErrorCode::kLengthMismatch,
                    "users disagree on segment count");
      }
      column[u] = users[u].segment_ranks[s].value();
    }
    std::sort(column.begin(), column.end());
    const std::size_t k = column.size();
    const int median = (k % 2 == 1)
                           ? column[k / 2]
                           : (column[k / 2 - 1] + column[k / 2]) / 2;
    out.emplace_back(median);
  }
  return out;
}

struct SmoothingOptions {
  // sigma = segment length / sigma_divisor
  double sigma_divisor = 6.0;
};

// Each selected frame spreads an unnormalized Gaussian (peak 1) over its own
// segment; overlapping bumps combine by max. Frames outside key segments are 0.
inline std::vector<double> GaussianSmooth(const FrameMask& mask,
                                          const SegmentList& segments,
                                          SmoothingOptions options = {}) {
  ValidatePartition(segments, mask.size());
  if (!(options.sigma_divisor > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sigma divisor must be > 0");
  }
  std::vector<double> out(mask.size(), 0.0);
  for (const Segment& seg : segments) {
    const double sigma =
        static_cast<double>(seg.length()) / options.sigma_divisor;
    const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
    for (std::size_t f = seg.start; f < seg.end; ++f) {
      if (!mask[f]) continue;
      for (std::size_t i = seg.start; i < seg.end; ++i) {
        const double d = static_cast<double>(i) - static_cast<double>(f);
        out[i] = std::max(out[i], std::exp(-d * d * inv_two_var));
      }
    }
  }
  return out;
}

enum class SubsetMode { kStochastic, kDeterministic };

// One frame per key segment (a segment with any nonzero weight). Stochastic
// mode draws proportionally to the weights; deterministic mode takes the
// earliest maximum.
inline std::vector<std::size_t> SampleTrainingSubset(
    std::span<const double> smoothed, const SegmentList& segments, Rng& rng,
    SubsetMode mode = SubsetMode::kStochastic) {
  ValidatePartition(segments, smoothed.size());
  std::vector<std::size_t> subset;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const Segment& seg = segments[s];
    double total = 0.0;
    bool key = false;
    for (std::size_t f = seg.start; f < seg.end; ++f) {
      const double w = smoothed[f];
      if (!std::isfinite(w) || w < 0.0) {
        throw Error(ErrorCode::kDegenerateWeights,
                    "weight at frame " + std::to_string(f));
      }
      key = key || w != 0.0;
      total += w;
    }
    if (!key) continue;
    if (!(total > 0.0)) {
      throw Error(ErrorCode::kDegenerateWeights,
                  "segment " + std::to_string(s) + " weights sum to 0");
    }
    std::size_t pick = seg.start;
    if (mode == SubsetMode::kDeterministic) {
      for (std::size_t f = seg.start + 1; f < seg.end; ++f)
        if (smoothed[f] > smoothed[pick]) pick = f;
    } else {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = seg.end;
      for (std::size_t f = seg.start; f < seg.end; ++f) {
        acc += smoothed[f];
        if (target < acc && smoothed[f] > 0.0) {
          pick = f;
          break;
        }
      }
      if (pick == seg.end) {
        // Rounding left target past the final cumulative sum.
        for (std::size_t f = seg.end; f-- > seg.start;) {
          if (smoothed[f] > 0.0) {
            pick = f;
            break;
          }
        }
      }
    }
    subset.push_back(pick);
  }
  return subset;
}

inline std::vector<ActionnessRank> SegmentToFrameRanks(
    std::span<const ActionnessRank> segment_ranks, const SegmentList& segments) {
  if (segment_ranks.size() != segments.size()) {
    throw Error(ErrorCode::kLengthMismatch, "rank count != segment count");
  }
  std::vector<ActionnessRank> out;
  for (std::size_t s = 0; s < segments.size(); ++s)
    out.insert(out.end(), segments[s].length(), segment_ranks[s]);
  return out;
}

inline OracleLabels BuildOracleLabels(const AnnotationSet& annotations,
                                      SmoothingOptions smoothing = {}) {
  annotations.validate();
  OracleLabels labels;
  labels.summary_mask = OracleSummary(annotations.users, annotations.segments);
  labels.smoothed =
      GaussianSmooth(labels.summary_mask, annotations.segments, smoothing);
  labels.segment_ranks = OracleActionness(annotations.users);
  labels.frame_ranks =
      SegmentToFrameRanks(labels.segment_ranks, annotations.segments);
  return labels;
}

}  // namespace actsum

#endif  // ACTSUM_LABELS_HPP_
