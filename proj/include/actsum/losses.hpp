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

// DPP kernel construction and likelihood, actionness cross-entropy and the
// joint objective S + lambda * R, each with its gradient.

#ifndef ACTSUM_LOSSES_HPP_
#define ACTSUM_LOSSES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "actsum/error.hpp"
#include "actsum/numerics.hpp"

namespace actsum {

// L = diag(q) Phi Phi^T diag(q), the Gram matrix of the rows q_i * phi_i.
struct DppKernel {
  Matrix L;
};

inline Matrix ScaleRows(const Matrix& phi, std::span<const double> q) {
  if (phi.rows() != q.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "phi has " + std::to_string(phi.rows()) + " rows, q has " +
                    std::to_string(q.size()));
  }
  Matrix scaled = phi;
  for (std::size_t i = 0; i < scaled.rows(); ++i)
    for (double& v : scaled.row(i)) v *= q[i];
  return scaled;
}

inline DppKernel BuildDppKernel(const Matrix& phi, std::span<const double> q) {
  if (q.empty()) throw Error(ErrorCode::kShapeMismatch, "empty quality vector");
  for (double v : q) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteValue, "quality");
  }
  const Matrix b = ScaleRows(phi, q);
  return {MatMulTransB(b, b)};
}

namespace detail {

inline void ValidateSubset(std::span<const std::size_t> y, std::size_t n) {
  std::vector<std::size_t> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] >= n) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "subset index " + std::to_string(sorted[i]) + " >= " +
                      std::to_string(n));
    }
    if (i > 0 && sorted[i] == sorted[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "subset repeats index " + std::to_string(sorted[i]));
    }
  }
}

inline Matrix PlusIdentity(const Matrix& m) {
  Matrix out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) out(i, i) += 1.0;
  return out;
}

template <typename Fn>
auto OnSubset(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNotPositiveDefinite) {
      throw Error(ErrorCode::kSingularSubset, e.what());
    }
    throw;
  }
}

}  // namespace detail

// -log P(y) = log det(L + I) - log det(L_y); det of the empty minor is 1.
inline double DppMleLoss(const DppKernel& kernel,
                         std::span<const std::size_t> y) {
  const Matrix& L = kernel.L;
  detail::ValidateSubset(y, L.rows());
  const double normalizer = LogDet(detail::PlusIdentity(L));
  const double subset =
      detail::OnSubset([&] { return LogDet(Submatrix(L, y, y)); });
  return normalizer - subset;
}

// d(-log P(y)) / dL = (L + I)^-1 - embed((L_y)^-1).
inline Matrix DppMleGrad(const DppKernel& kernel,
                         std::span<const std::size_t> y) {
  const Matrix& L = kernel.L;
  detail::ValidateSubset(y, L.rows());
  Matrix grad = SpdInverse(detail::PlusIdentity(L));
  const Matrix inv_y =
      detail::OnSubset([&] { return SpdInverse(Submatrix(L, y, y)); });
  for (std::size_t a = 0; a < y.size(); ++a)
    for (std::size_t b = 0; b < y.size(); ++b) grad(y[a], y[b]) -= inv_y(a, b);
  return grad;
}

inline constexpr double kProbabilityFloor = 1e-12;

// -sum_i sum_j t_ij log max(p_ij, 1e-12), summed over frames.
inline double ActionnessCrossEntropy(const Matrix& p, const Matrix& t) {
  if (p.rows() != t.rows() || p.cols() != t.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "prediction/target shape differ");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = 0; j < p.cols(); ++j)
      if (t(i, j) != 0.0)
        loss -= t(i, j) * std::log(std::max(p(i, j), kProbabilityFloor));
  return loss;
}

// Gradient of the cross-entropy with respect to the softmax logits. Clamped
// probabilities contribute nothing.
inline Matrix ActionnessCrossEntropyLogitGrad(const Matrix& p, const Matrix& t) {
  if (p.rows() != t.rows() || p.cols() != t.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "prediction/target shape differ");
  }
  Matrix grad(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    for (std::size_t c = 0; c < p.cols(); ++c) {
      const double w = t(i, c);
      if (w == 0.0 || p(i, c) < kProbabilityFloor) continue;
      for (std::size_t j = 0; j < p.cols(); ++j) grad(i, j) += w * p(i, j);
      grad(i, c) -= w;
    }
  }
  return grad;
}

inline double JointLoss(double summarization, double regularizer,
                        double lambda) {
  return summarization + lambda * regularizer;
}

}  // namespace actsum

#endif  // ACTSUM_LOSSES_HPP_
