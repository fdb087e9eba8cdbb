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

#ifndef ACTSUM_MASK_HPP_
#define ACTSUM_MASK_HPP_

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "actsum/error.hpp"
#include "actsum/segmentation.hpp"

namespace actsum {

// Boolean selection over frames.
using FrameMask = std::vector<bool>;

inline std::size_t CountSelected(const FrameMask& mask) {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

inline std::size_t CountOverlap(const FrameMask& a, const FrameMask& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "mask lengths " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));
  }
  std::size_t o = 0;
  for (std::size_t i = 0; i < a.size(); ++i) o += (a[i] && b[i]) ? 1 : 0;
  return o;
}

struct F1Score {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Both sides empty counts as perfect agreement; exactly one empty side as none.
inline F1Score F1FromCounts(std::size_t overlap, std::size_t predicted,
                            std::size_t reference) {
  if (predicted == 0 && reference == 0) return {1.0, 1.0, 1.0};
  if (predicted == 0 || reference == 0) return {0.0, 0.0, 0.0};
  F1Score s;
  s.precision = static_cast<double>(overlap) / static_cast<double>(predicted);
  s.recall = static_cast<double>(overlap) / static_cast<double>(reference);
  s.f1 = (s.precision + s.recall) > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

inline F1Score MaskF1(const FrameMask& predicted, const FrameMask& reference) {
  const std::size_t o = CountOverlap(predicted, reference);
  return F1FromCounts(o, CountSelected(predicted), CountSelected(reference));
}

inline FrameMask MaskFromSegments(const SegmentList& segments,
                                  std::span<const std::size_t> chosen,
                                  std::size_t n) {
  FrameMask mask(n, false);
  for (std::size_t idx : chosen) {
    if (idx >= segments.size()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "segment index " + std::to_string(idx));
    }
    for (std::size_t f = segments[idx].start; f < segments[idx].end; ++f)
      mask[f] = true;
  }
  return mask;
}

inline FrameMask MaskFromFrames(std::span<const std::size_t> frames,
                                std::size_t n) {
  FrameMask mask(n, false);
  for (std::size_t f : frames) {
    if (f >= n) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "frame " + std::to_string(f) + " >= " + std::to_string(n));
    }
    mask[f] = true;
  }
  return mask;
}

inline std::vector<std::size_t> SelectedFrames(const FrameMask& mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.push_back(i);
  return out;
}

}  // namespace actsum

#endif  // ACTSUM_MASK_HPP_
