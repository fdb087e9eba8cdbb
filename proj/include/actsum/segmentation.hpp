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

// Kernel temporal segmentation: an exact change-point dynamic program over
// the linear Gram matrix of unit-normalized frame features.

#ifndef ACTSUM_SEGMENTATION_HPP_
#define ACTSUM_SEGMENTATION_HPP_

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "actsum/error.hpp"
#include "actsum/numerics.hpp"

namespace actsum {

// Half-open frame range [start, end).
struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - start; }
  bool contains(std::size_t frame) const noexcept {
    return frame >= start && frame < end;
  }
  friend bool operator==(const Segment&, const Segment&) = default;
};

// Contiguous partition of [0, n) in temporal order.
using SegmentList = std::vector<Segment>;

inline void ValidatePartition(const SegmentList& segments, std::size_t n) {
  if (segments.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty segment list");
  }
  std::size_t expected = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    if (s.start != expected || s.end <= s.start || s.end > n) {
      throw Error(ErrorCode::kInvalidArgument,
                  "segment " + std::to_string(i) + " [" +
                      std::to_string(s.start) + "," + std::to_string(s.end) +
                      ") breaks the partition of [0," + std::to_string(n) +
                      ")");
    }
    expected = s.end;
  }
  if (expected != n) {
    throw Error(ErrorCode::kInvalidArgument,
                "segments end at " + std::to_string(expected) + ", expected " +
                    std::to_string(n));
  }
}

// Index of the segment owning each frame.
inline std::vector<std::size_t> FrameToSegment(const SegmentList& segments) {
  std::vector<std::size_t> owner;
  for (std::size_t s = 0; s < segments.size(); ++s)
    for (std::size_t f = segments[s].start; f < segments[s].end; ++f)
      owner.push_back(s);
  return owner;
}

// Within-segment scatter: sum_i K_ii - (1/len) sum_{i,j} K_ij over [start,end).
inline double SegmentCost(const Matrix& kernel, std::size_t start,
                          std::size_t end) {
  if (kernel.rows() != kernel.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "kernel must be square");
  }
  if (start >= end || end > kernel.rows()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "segment [" + std::to_string(start) + "," +
                    std::to_string(end) + ") outside kernel of size " +
                    std::to_string(kernel.rows()));
  }
  double diag = 0.0;
  double block = 0.0;
  for (std::size_t i = start; i < end; ++i) {
    diag += kernel(i, i);
    for (std::size_t j = start; j < end; ++j) block += kernel(i, j);
  }
  return diag - block / static_cast<double>(end - start);
}

// Linear Gram matrix of the row-normalized features. All-zero rows stay zero.
inline Matrix NormalizedGram(const Matrix& features) {
  Matrix unit = features;
  for (std::size_t i = 0; i < unit.rows(); ++i) {
    auto r = unit.row(i);
    const double norm = Norm2(r);
    if (norm > 0.0)
      for (double& v : r) v /= norm;
  }
  return MatMulTransB(unit, unit);
}

// Penalty shape g(n, m) = m (ln(n/m) + 1).
inline double KtsPenaltyShape(std::size_t n, std::size_t m) {
  const double dm = static_cast<double>(m);
  return dm * (std::log(static_cast<double>(n) / dm) + 1.0);
}

// O(1) segment costs from 2-D prefix sums of the kernel.
class ScatterTable {
 public:
  explicit ScatterTable(const Matrix& kernel)
      : n_(kernel.rows()), block_((n_ + 1) * (n_ + 1), 0.0), diag_(n_ + 1, 0.0) {
    for (std::size_t i = 0; i < n_; ++i) {
      diag_[i + 1] = diag_[i] + kernel(i, i);
      double row_acc = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        row_acc += kernel(i, j);
        at(i + 1, j + 1) = at(i, j + 1) + row_acc;
      }
    }
  }

  std::size_t size() const noexcept { return n_; }

  double cost(std::size_t start, std::size_t end) const {
    const double block = at(end, end) - at(start, end) - at(end, start) +
                         at(start, start);
    const double c =
        (diag_[end] - diag_[start]) - block / static_cast<double>(end - start);
    return c < 0.0 ? 0.0 : c;
  }

 private:
  double& at(std::size_t i, std::size_t j) { return block_[i * (n_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const {
    return block_[i * (n_ + 1) + j];
  }

  std::size_t n_;
  std::vector<double> block_;
  std::vector<double> diag_;
};

struct KtsOptions {
  // 0 selects the default ceil(n / 10).
  std::size_t max_segments = 0;
  double penalty = 1.0;
};

inline double KtsObjective(const Matrix& kernel, const SegmentList& segments,
                           double penalty) {
  double total = 0.0;
  for (const Segment& s : segments) total += SegmentCost(kernel, s.start, s.end);
  return total + penalty * KtsPenaltyShape(kernel.rows(), segments.size());
}

// Exact minimizer of sum(scatter) + penalty * g(n, m) over partitions with at
// most max_segments pieces. Ties prefer fewer segments, then the
// lexicographically earliest boundaries.
inline SegmentList KtsSegmentKernel(const Matrix& kernel, KtsOptions options) {
  const std::size_t n = kernel.rows();
  if (n == 0) throw Error(ErrorCode::kEmptyInput, "no frames to segment");
  if (options.penalty < 0.0 || !std::isfinite(options.penalty)) {
    throw Error(ErrorCode::kInvalidArgument, "penalty must be finite and >= 0");
  }
  std::size_t max_m = options.max_segments == 0 ? (n + 9) / 10
                                                : options.max_segments;
  max_m = std::min(max_m, n);

  const ScatterTable table(kernel);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // suffix[k][i]: least scatter splitting [i, n) into exactly k segments.
  std::vector<std::vector<double>> suffix(max_m + 1,
                                          std::vector<double>(n + 1, kInf));
  for (std::size_t i = 0; i < n; ++i) suffix[1][i] = table.cost(i, n);
  for (std::size_t k = 2; k <= max_m; ++k) {
    for (std::size_t i = 0; i + k <= n; ++i) {
      double best = kInf;
      for (std::size_t j = i + 1; j + (k - 1) <= n; ++j) {
        best = std::min(best, table.cost(i, j) + suffix[k - 1][j]);
      }
      suffix[k][i] = best;
    }
  }

  auto tol = [](double v) { return 1e-9 * std::max(1.0, std::abs(v)); };

  std::size_t best_m = 1;
  double best_obj = suffix[1][0] + options.penalty * KtsPenaltyShape(n, 1);
  for (std::size_t m = 2; m <= max_m; ++m) {
    const double obj = suffix[m][0] + options.penalty * KtsPenaltyShape(n, m);
    if (obj < best_obj - tol(best_obj)) {
      best_obj = obj;
      best_m = m;
    }
  }

  SegmentList out;
  std::size_t start = 0;
  for (std::size_t k = best_m; k >= 1; --k) {
    std::size_t end = n;
    if (k > 1) {
      const double target = suffix[k][start];
      for (std::size_t j = start + 1; j + (k - 1) <= n; ++j) {
        if (table.cost(start, j) + suffix[k - 1][j] <= target + tol(target)) {
          end = j;
          break;
        }
      }
    }
    out.push_back({start, end});
    start = end;
  }
  ValidatePartition(out, n);
  return out;
}

inline SegmentList KtsSegment(const Matrix& features, KtsOptions options = {}) {
  if (features.rows() == 0) {
    throw Error(ErrorCode::kEmptyInput, "no frames to segment");
  }
  return KtsSegmentKernel(NormalizedGram(features), options);
}

}  // namespace actsum

#endif  // ACTSUM_SEGMENTATION_HPP_
