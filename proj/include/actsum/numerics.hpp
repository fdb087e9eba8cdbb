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

// Dense row-major matrices, Cholesky-based log-determinants and a
// central-difference gradient checker. Sizes in this library stay in the low
// thousands, so everything here is plain loops over contiguous storage.

#ifndef ACTSUM_NUMERICS_HPP_
#define ACTSUM_NUMERICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "actsum/error.hpp"

namespace actsum {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw Error(ErrorCode::kShapeMismatch,
                  "matrix data length " + std::to_string(data_.size()) +
                      " != " + std::to_string(rows_) + "x" +
                      std::to_string(cols_));
    }
  }
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) {
        throw Error(ErrorCode::kShapeMismatch, "ragged matrix literal");
      }
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix Identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  Matrix& operator+=(const Matrix& other) {
    require_same_shape(other, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  void require_same_shape(const Matrix& other, const char* what) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
      throw Error(ErrorCode::kShapeMismatch,
                  std::string(what) + " on " + std::to_string(rows_) + "x" +
                      std::to_string(cols_) + " and " +
                      std::to_string(other.rows_) + "x" +
                      std::to_string(other.cols_));
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace detail {

inline void RequireShape(bool ok, const char* op, const Matrix& a,
                         const Matrix& b) {
  if (!ok) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " vs " +
                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

}  // namespace detail

// A * B
inline Matrix MatMul(const Matrix& a, const Matrix& b) {
  detail::RequireShape(a.cols() == b.rows(), "MatMul", a, b);
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* o = out.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.row(k).data();
      for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aik * brow[j];
    }
  }
  return out;
}

// A^T * B
inline Matrix MatMulTransA(const Matrix& a, const Matrix& b) {
  detail::RequireShape(a.rows() == b.rows(), "MatMulTransA", a, b);
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* brow = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      double* o = out.row(i).data();
      for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aki * brow[j];
    }
  }
  return out;
}

// A * B^T
inline Matrix MatMulTransB(const Matrix& a, const Matrix& b) {
  detail::RequireShape(a.cols() == b.cols(), "MatMulTransB", a, b);
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* brow = b.row(j).data();
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += arow[k] * brow[k];
      out(i, j) = s;
    }
  }
  return out;
}

inline Matrix Transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

// Rows `rows` and columns `cols` of m, in the given order.
inline Matrix Submatrix(const Matrix& m, std::span<const std::size_t> rows,
                        std::span<const std::size_t> cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (rows[i] >= m.rows() || cols[j] >= m.cols()) {
        throw Error(ErrorCode::kIndexOutOfRange, "submatrix index");
      }
      out(i, j) = m(rows[i], cols[j]);
    }
  }
  return out;
}

inline bool IsSymmetric(const Matrix& m, double tol = 1e-9) {
  if (m.rows() != m.cols()) return false;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
  return true;
}

// Lower-triangular factor C with M = C C^T. Throws kNotPositiveDefinite on the
// first pivot that is not strictly positive.
inline Matrix Cholesky(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "Cholesky of non-square matrix");
  }
  if (!IsSymmetric(m)) {
    throw Error(ErrorCode::kNotSymmetric, "Cholesky input not symmetric");
  }
  const std::size_t n = m.rows();
  Matrix c(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    const double* cj = c.row(j).data();
    for (std::size_t k = 0; k < j; ++k) d -= cj[k] * cj[k];
    if (!(d > 0.0)) {
      throw Error(ErrorCode::kNotPositiveDefinite,
                  "pivot " + std::to_string(j) + " = " + std::to_string(d));
    }
    const double djj = std::sqrt(d);
    c(j, j) = djj;
    for (std::size_t i = j + 1; i < n; ++i) {
      const double* ci = c.row(i).data();
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= ci[k] * cj[k];
      c(i, j) = s / djj;
    }
  }
  return c;
}

// log det(M) for symmetric positive-definite M; the empty matrix has
// determinant 1.
inline double LogDet(const Matrix& m) {
  const Matrix c = Cholesky(m);
  double acc = 0.0;
  for (std::size_t i = 0; i < c.rows(); ++i) acc += std::log(c(i, i));
  return 2.0 * acc;
}

// Inverse of a symmetric positive-definite matrix through its Cholesky factor.
inline Matrix SpdInverse(const Matrix& m) {
  const Matrix c = Cholesky(m);
  const std::size_t n = c.rows();
  // Invert the lower factor column by column: C * W = I.
  Matrix w(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t i = col; i < n; ++i) {
      double s = (i == col) ? 1.0 : 0.0;
      for (std::size_t k = col; k < i; ++k) s -= c(i, k) * w(k, col);
      w(i, col) = s / c(i, i);
    }
  }
  // M^-1 = W^T W
  Matrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = i; k < n; ++k) s += w(k, i) * w(k, j);
      inv(i, j) = s;
      inv(j, i) = s;
    }
  }
  return inv;
}

inline double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double Norm2(std::span<const double> a) { return std::sqrt(Dot(a, a)); }

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  bool passed = true;
};

using ScalarFn = std::function<double(std::span<const double>)>;

// Compares `analytic` against central differences of `f` around `x`. The
// per-coordinate relative error uses max(|a|, |b|, 1e-8) as denominator.
inline GradCheckReport GradCheck(const ScalarFn& f,
                                 std::span<const double> analytic,
                                 std::span<const double> x, double eps,
                                 double tol) {
  if (analytic.size() != x.size()) {
    throw Error(ErrorCode::kShapeMismatch, "gradient length != parameter length");
  }
  const double mag = std::abs(eps);
  if (!(mag >= 1e-7 && mag <= 1e-3)) {
    throw Error(ErrorCode::kInvalidArgument,
                "eps magnitude must lie in [1e-7, 1e-3]");
  }
  std::vector<double> probe(x.begin(), x.end());
  GradCheckReport report;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(analytic[i])) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "analytic gradient at " + std::to_string(i));
    }
    probe[i] = x[i] + eps;
    const double fp = f(probe);
    probe[i] = x[i] - eps;
    const double fm = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "objective at coordinate " + std::to_string(i));
    }
    const double numeric = (fp - fm) / (2.0 * eps);
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = i;
    }
  }
  report.passed = report.max_rel_error <= tol;
  return report;
}

}  // namespace actsum

#endif  // ACTSUM_NUMERICS_HPP_
