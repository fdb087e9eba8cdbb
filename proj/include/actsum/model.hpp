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

// Bidirectional GRU encoder over per-frame features, concatenated with the
// raw features and fed to three two-layer heads: DPP diversity features phi,
// frame quality q and actionness class probabilities. Gradients come from
// hand-written backpropagation through time.

#ifndef ACTSUM_MODEL_HPP_
#define ACTSUM_MODEL_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "actsum/error.hpp"
#include "actsum/labels.hpp"
#include "actsum/losses.hpp"
#include "actsum/numerics.hpp"
#include "actsum/random.hpp"

namespace actsum {

inline constexpr std::size_t kNumActionnessClasses = ActionnessRank::kNumScales;

struct ModelDims {
  std::size_t input_dim = 1024;
  std::size_t hidden = 256;  // per direction
  std::size_t head_hidden = 256;
  std::size_t phi_dim = 256;

  std::size_t temporal_dim() const noexcept { return 2 * hidden; }
  std::size_t aggregate_dim() const noexcept { return input_dim + 2 * hidden; }
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

// One scan direction. Input weights are d_in x h, recurrent h x h, biases 1 x h.
struct GruDirection {
  Matrix w_z, w_r, w_h;
  Matrix u_z, u_r, u_h;
  Matrix b_z, b_r, b_h;

  static GruDirection Zeros(std::size_t d_in, std::size_t h) {
    return {Matrix(d_in, h), Matrix(d_in, h), Matrix(d_in, h),
            Matrix(h, h),    Matrix(h, h),    Matrix(h, h),
            Matrix(1, h),    Matrix(1, h),    Matrix(1, h)};
  }

  template <typename Self, typename Fn>
  static void Visit(Self& self, const std::string& prefix, Fn&& fn) {
    fn(prefix + ".w_z", self.w_z);
    fn(prefix + ".w_r", self.w_r);
    fn(prefix + ".w_h", self.w_h);
    fn(prefix + ".u_z", self.u_z);
    fn(prefix + ".u_r", self.u_r);
    fn(prefix + ".u_h", self.u_h);
    fn(prefix + ".b_z", self.b_z);
    fn(prefix + ".b_r", self.b_r);
    fn(prefix + ".b_h", self.b_h);
  }
};

struct GruParams {
  GruDirection forward;
  GruDirection backward;
};

// Two-layer perceptron: tanh hidden layer, linear output.
struct Mlp {
  Matrix w1, b1, w2, b2;

  static Mlp Zeros(std::size_t in, std::size_t hidden, std::size_t out) {
    return {Matrix(in, hidden), Matrix(1, hidden), Matrix(hidden, out),
            Matrix(1, out)};
  }

  template <typename Self, typename Fn>
  static void Visit(Self& self, const std::string& prefix, Fn&& fn) {
    fn(prefix + ".w1", self.w1);
    fn(prefix + ".b1", self.b1);
    fn(prefix + ".w2", self.w2);
    fn(prefix + ".b2", self.b2);
  }
};

struct HeadParams {
  Mlp phi;         // linear output, phi_dim wide
  Mlp quality;     // sigmoid of one output
  Mlp actionness;  // softmax over the four scales
};

struct ModelParameters {
  ModelDims dims;
  GruParams gru;
  HeadParams heads;

  static ModelParameters Zeros(const ModelDims& dims) {
    ModelParameters p;
    p.dims = dims;
    p.gru.forward = GruDirection::Zeros(dims.input_dim, dims.hidden);
    p.gru.backward = GruDirection::Zeros(dims.input_dim, dims.hidden);
    const std::size_t f = dims.aggregate_dim();
    p.heads.phi = Mlp::Zeros(f, dims.head_hidden, dims.phi_dim);
    p.heads.quality = Mlp::Zeros(f, dims.head_hidden, 1);
    p.heads.actionness =
        Mlp::Zeros(f, dims.head_hidden, kNumActionnessClasses);
    return p;
  }

  // Glorot-uniform weights, zero biases, drawn in tensor visiting order.
  static ModelParameters Initialize(const ModelDims& dims, std::uint64_t seed) {
    ModelParameters p = Zeros(dims);
    Rng rng(seed);
    p.for_each_tensor([&](const std::string& name, Matrix& m) {
      if (name[name.rfind('.') + 1] == 'b') return;
      const double a =
          std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
      for (double& v : m.values()) v = rng.uniform(-a, a);
    });
    return p;
  }

  template <typename Fn>
  void for_each_tensor(Fn&& fn) {
    VisitAll(*this, std::forward<Fn>(fn));
  }
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const {
    VisitAll(*this, std::forward<Fn>(fn));
  }

  std::size_t parameter_count() const {
    std::size_t total = 0;
    for_each_tensor([&](const std::string&, const Matrix& m) { total += m.size(); });
    return total;
  }

  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for_each_tensor([&](const std::string&, const Matrix& m) {
      out.insert(out.end(), m.values().begin(), m.values().end());
    });
    return out;
  }

  void unflatten(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "flat vector has " + std::to_string(flat.size()) +
                      " entries, model needs " +
                      std::to_string(parameter_count()));
    }
    std::size_t offset = 0;
    for_each_tensor([&](const std::string&, Matrix& m) {
      std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), m.size(),
                  m.values().begin());
      offset += m.size();
    });
  }

  void validate() const {
    const ModelParameters expected = Zeros(dims);
    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    expected.for_each_tensor([&](const std::string&, const Matrix& m) {
      shapes.emplace_back(m.rows(), m.cols());
    });
    std::size_t i = 0;
    for_each_tensor([&](const std::string& name, const Matrix& m) {
      if (m.rows() != shapes[i].first || m.cols() != shapes[i].second) {
        throw Error(ErrorCode::kShapeMismatch, "tensor " + name);
      }
      if (!m.all_finite()) {
        throw Error(ErrorCode::kNonFiniteValue, "tensor " + name);
      }
      ++i;
    });
  }

 private:
  template <typename Self, typename Fn>
  static void VisitAll(Self& self, Fn&& fn) {
    GruDirection::Visit(self.gru.forward, "gru.forward", fn);
    GruDirection::Visit(self.gru.backward, "gru.backward", fn);
    Mlp::Visit(self.heads.phi, "heads.phi", fn);
    Mlp::Visit(self.heads.quality, "heads.quality", fn);
    Mlp::Visit(self.heads.actionness, "heads.actionness", fn);
  }
};

inline double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace detail {

inline void AddBiasRows(Matrix& m, const Matrix& bias) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias(0, j);
  }
}

inline Matrix ColumnSums(const Matrix& m) {
  Matrix out(1, m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(0, j) += m(i, j);
  return out;
}

inline Matrix ReverseRows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto src = m.row(m.rows() - 1 - i);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

// out[j] = sum_k v[k] * m(k, j)
inline void AccumulateVecMat(std::span<const double> v, const Matrix& m,
                             std::span<double> out) {
  for (std::size_t k = 0; k < m.rows(); ++k) {
    const double vk = v[k];
    if (vk == 0.0) continue;
    const double* row = m.row(k).data();
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += vk * row[j];
  }
}

// out[k] += sum_j m(k, j) * v[j]
inline void AccumulateMatVec(const Matrix& m, std::span<const double> v,
                             std::span<double> out) {
  for (std::size_t k = 0; k < m.rows(); ++k) {
    const double* row = m.row(k).data();
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += row[j] * v[j];
    out[k] += s;
  }
}

// m += a^T b for row vectors a, b
inline void AccumulateOuter(std::span<const double> a, std::span<const double> b,
                            Matrix& m) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double ak = a[k];
    if (ak == 0.0) continue;
    double* row = m.row(k).data();
    for (std::size_t j = 0; j < b.size(); ++j) row[j] += ak * b[j];
  }
}

// Gate activations for one step given the input projections x W (no bias).
struct GruStep {
  std::vector<double> z, r, c, h;
};

inline GruStep GruStepFromProjections(std::span<const double> xz,
                                      std::span<const double> xr,
                                      std::span<const double> xh,
                                      std::span<const double> h_prev,
                                      const GruDirection& p) {
  const std::size_t h = p.u_z.rows();
  GruStep s;
  s.z.assign(xz.begin(), xz.end());
  s.r.assign(xr.begin(), xr.end());
  s.c.assign(xh.begin(), xh.end());
  AccumulateVecMat(h_prev, p.u_z, s.z);
  AccumulateVecMat(h_prev, p.u_r, s.r);
  for (std::size_t j = 0; j < h; ++j) {
    s.z[j] = Sigmoid(s.z[j] + p.b_z(0, j));
    s.r[j] = Sigmoid(s.r[j] + p.b_r(0, j));
  }
  std::vector<double> gated(h);
  for (std::size_t j = 0; j < h; ++j) gated[j] = s.r[j] * h_prev[j];
  AccumulateVecMat(gated, p.u_h, s.c);
  s.h.resize(h);
  for (std::size_t j = 0; j < h; ++j) {
    s.c[j] = std::tanh(s.c[j] + p.b_h(0, j));
    s.h[j] = (1.0 - s.z[j]) * h_prev[j] + s.z[j] * s.c[j];
  }
  return s;
}

inline void CheckGruShapes(std::size_t x_dim, std::size_t h_dim,
                           const GruDirection& p) {
  const std::size_t h = p.u_z.rows();
  if (p.w_z.rows() != x_dim || p.w_z.cols() != h || h_dim != h) {
    throw Error(ErrorCode::kShapeMismatch,
                "GRU expects input " + std::to_string(p.w_z.rows()) +
                    " / hidden " + std::to_string(h) + ", got " +
                    std::to_string(x_dim) + " / " + std::to_string(h_dim));
  }
}

}  // namespace detail

// One GRU step: z = s(xW_z + hU_z + b_z), r = s(xW_r + hU_r + b_r),
// c = tanh(xW_h + (r*h)U_h + b_h), h' = (1 - z)*h + z*c.
inline std::vector<double> GruCellForward(std::span<const double> x,
                                          std::span<const double> h_prev,
                                          const GruDirection& params) {
  detail::CheckGruShapes(x.size(), h_prev.size(), params);
  const std::size_t h = h_prev.size();
  std::vector<double> xz(h, 0.0), xr(h, 0.0), xh(h, 0.0);
  detail::AccumulateVecMat(x, params.w_z, xz);
  detail::AccumulateVecMat(x, params.w_r, xr);
  detail::AccumulateVecMat(x, params.w_h, xh);
  return detail::GruStepFromProjections(xz, xr, xh, h_prev, params).h;
}

// Activations of one direction over a sequence, kept for backpropagation.
struct GruTrace {
  Matrix z, r, c, h;  // n x hidden, in scan order
};

inline GruTrace GruScan(const Matrix& x, const GruDirection& params) {
  const std::size_t hdim = params.u_z.rows();
  detail::CheckGruShapes(x.cols(), hdim, params);
  const std::size_t n = x.rows();
  const Matrix xz = MatMul(x, params.w_z);
  const Matrix xr = MatMul(x, params.w_r);
  const Matrix xh = MatMul(x, params.w_h);
  GruTrace t{Matrix(n, hdim), Matrix(n, hdim), Matrix(n, hdim),
             Matrix(n, hdim)};
  std::vector<double> state(hdim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    detail::GruStep s = detail::GruStepFromProjections(xz.row(i), xr.row(i),
                                                       xh.row(i), state, params);
    std::copy(s.z.begin(), s.z.end(), t.z.row(i).begin());
    std::copy(s.r.begin(), s.r.end(), t.r.row(i).begin());
    std::copy(s.c.begin(), s.c.end(), t.c.row(i).begin());
    std::copy(s.h.begin(), s.h.end(), t.h.row(i).begin());
    state = std::move(s.h);
  }
  return t;
}

// Backpropagation through time for one direction. `dh` holds dLoss/dh_t in
// scan order; gradients accumulate into `grad`.
inline void GruScanBackward(const Matrix& x, const GruDirection& params,
                            const GruTrace& trace, const Matrix& dh,
                            GruDirection& grad) {
  const std::size_t n = x.rows();
  const std::size_t hdim = params.u_z.rows();
  Matrix daz(n, hdim), dar(n, hdim), dac(n, hdim);
  std::vector<double> carry(hdim, 0.0), next(hdim), h_prev(hdim), d_gated(hdim),
      gated(hdim);
  for (std::size_t t = n; t-- > 0;) {
    auto z = trace.z.row(t);
    auto r = trace.r.row(t);
    auto c = trace.c.row(t);
    if (t > 0) {
      auto hp = trace.h.row(t - 1);
      std::copy(hp.begin(), hp.end(), h_prev.begin());
    } else {
      std::fill(h_prev.begin(), h_prev.end(), 0.0);
    }
    auto da_z = daz.row(t);
    auto da_r = dar.row(t);
    auto da_c = dac.row(t);
    for (std::size_t j = 0; j < hdim; ++j) {
      const double g = dh(t, j) + carry[j];
      next[j] = g * (1.0 - z[j]);
      da_z[j] = g * (c[j] - h_prev[j]) * z[j] * (1.0 - z[j]);
      da_c[j] = g * z[j] * (1.0 - c[j] * c[j]);
      gated[j] = r[j] * h_prev[j];
    }
    detail::AccumulateOuter(gated, da_c, grad.u_h);
    std::fill(d_gated.begin(), d_gated.end(), 0.0);
    detail::AccumulateMatVec(params.u_h, da_c, d_gated);
    for (std::size_t j = 0; j < hdim; ++j) {
      da_r[j] = d_gated[j] * h_prev[j] * r[j] * (1.0 - r[j]);
      next[j] += d_gated[j] * r[j];
    }
    detail::AccumulateOuter(h_prev, da_z, grad.u_z);
    detail::AccumulateOuter(h_prev, da_r, grad.u_r);
    detail::AccumulateMatVec(params.u_z, da_z, next);
    detail::AccumulateMatVec(params.u_r, da_r, next);
    std::swap(carry, next);
  }
  grad.w_z += MatMulTransA(x, daz);
  grad.w_r += MatMulTransA(x, dar);
  grad.w_h += MatMulTransA(x, dac);
  grad.b_z += detail::ColumnSums(daz);
  grad.b_r += detail::ColumnSums(dar);
  grad.b_h += detail::ColumnSums(dac);
}

// n x 2h: row i = [h_fwd(i) | h_bwd(i)], both scans from a zero state.
inline Matrix BiGruForward(const Matrix& x, const GruParams& params) {
  if (x.rows() == 0) throw Error(ErrorCode::kEmptyInput, "no frames");
  const GruTrace fwd = GruScan(x, params.forward);
  const GruTrace bwd = GruScan(detail::ReverseRows(x), params.backward);
  const std::size_t n = x.rows();
  const std::size_t h = fwd.h.cols();
  Matrix out(n, 2 * h);
  for (std::size_t i = 0; i < n; ++i) {
    auto dst = out.row(i);
    auto f = fwd.h.row(i);
    auto b = bwd.h.row(n - 1 - i);
    std::copy(f.begin(), f.end(), dst.begin());
    std::copy(b.begin(), b.end(), dst.begin() + static_cast<std::ptrdiff_t>(h));
  }
  return out;
}

// Row-wise concatenation [spatial | temporal].
inline Matrix Aggregate(const Matrix& spatial, const Matrix& temporal) {
  if (spatial.rows() != temporal.rows()) {
    throw Error(ErrorCode::kShapeMismatch,
                "aggregate row counts " + std::to_string(spatial.rows()) +
                    " vs " + std::to_string(temporal.rows()));
  }
  Matrix out(spatial.rows(), spatial.cols() + temporal.cols());
  for (std::size_t i = 0; i < spatial.rows(); ++i) {
    auto dst = out.row(i);
    auto a = spatial.row(i);
    auto b = temporal.row(i);
    std::copy(a.begin(), a.end(), dst.begin());
    std::copy(b.begin(), b.end(),
              dst.begin() + static_cast<std::ptrdiff_t>(a.size()));
  }
  return out;
}

struct MlpTrace {
  Matrix hidden;  // tanh activations
  Matrix out;     // pre-activation outputs
};

inline MlpTrace MlpForward(const Matrix& input, const Mlp& mlp) {
  if (input.cols() != mlp.w1.rows()) {
    throw Error(ErrorCode::kShapeMismatch,
                "head expects width " + std::to_string(mlp.w1.rows()) +
                    ", got " + std::to_string(input.cols()));
  }
  MlpTrace t;
  t.hidden = MatMul(input, mlp.w1);
  detail::AddBiasRows(t.hidden, mlp.b1);
  for (double& v : t.hidden.values()) v = std::tanh(v);
  t.out = MatMul(t.hidden, mlp.w2);
  detail::AddBiasRows(t.out, mlp.b2);
  return t;
}

// Accumulates parameter gradients and returns dLoss/dInput.
inline Matrix MlpBackward(const Matrix& input, const Mlp& mlp,
                          const MlpTrace& trace, const Matrix& d_out,
                          Mlp& grad) {
  grad.w2 += MatMulTransA(trace.hidden, d_out);
  grad.b2 += detail::ColumnSums(d_out);
  Matrix d_hidden = MatMulTransB(d_out, mlp.w2);
  for (std::size_t i = 0; i < d_hidden.size(); ++i) {
    const double a = trace.hidden.values()[i];
    d_hidden.values()[i] *= 1.0 - a * a;
  }
  grad.w1 += MatMulTransA(input, d_hidden);
  grad.b1 += detail::ColumnSums(d_hidden);
  return MatMulTransB(d_hidden, mlp.w1);
}

struct HeadOutputs {
  Matrix phi;              // n x phi_dim
  std::vector<double> q;   // n, in (0, 1)
  Matrix p;                // n x 4, rows sum to 1
};

namespace detail {

inline HeadOutputs FinishHeads(const MlpTrace& phi, const MlpTrace& quality,
                               const MlpTrace& actionness) {
  HeadOutputs out;
  out.phi = phi.out;
  out.q.resize(quality.out.rows());
  for (std::size_t i = 0; i < out.q.size(); ++i)
    out.q[i] = Sigmoid(quality.out(i, 0));
  out.p = actionness.out;
  for (std::size_t i = 0; i < out.p.rows(); ++i) {
    auto r = out.p.row(i);
    double mx = r[0];
    for (double v : r) mx = std::max(mx, v);
    double total = 0.0;
    for (double& v : r) {
      v = std::exp(v - mx);
      total += v;
    }
    for (double& v : r) v /= total;
  }
  return out;
}

}  // namespace detail

inline HeadOutputs HeadsForward(const Matrix& aggregate,
                                const HeadParams& heads) {
  return detail::FinishHeads(MlpForward(aggregate, heads.phi),
                             MlpForward(aggregate, heads.quality),
                             MlpForward(aggregate, heads.actionness));
}

// Full forward pass with every intermediate kept.
struct ForwardTrace {
  Matrix reversed_input;
  GruTrace forward_scan;
  GruTrace backward_scan;  // in reversed frame order
  Matrix aggregate;
  MlpTrace phi, quality, actionness;
  HeadOutputs outputs;
};

inline ForwardTrace ModelForward(const ModelParameters& params,
                                 const Matrix& features) {
  if (features.rows() == 0) throw Error(ErrorCode::kEmptyInput, "no frames");
  if (features.cols() != params.dims.input_dim) {
    throw Error(ErrorCode::kShapeMismatch,
                "features have dim " + std::to_string(features.cols()) +
                    ", model expects " + std::to_string(params.dims.input_dim));
  }
  ForwardTrace t;
  t.reversed_input = detail::ReverseRows(features);
  t.forward_scan = GruScan(features, params.gru.forward);
  t.backward_scan = GruScan(t.reversed_input, params.gru.backward);
  const std::size_t n = features.rows();
  const std::size_t h = params.dims.hidden;
  Matrix temporal(n, 2 * h);
  for (std::size_t i = 0; i < n; ++i) {
    auto dst = temporal.row(i);
    auto f = t.forward_scan.h.row(i);
    auto b = t.backward_scan.h.row(n - 1 - i);
    std::copy(f.begin(), f.end(), dst.begin());
    std::copy(b.begin(), b.end(), dst.begin() + static_cast<std::ptrdiff_t>(h));
  }
  t.aggregate = Aggregate(features, temporal);
  t.phi = MlpForward(t.aggregate, params.heads.phi);
  t.quality = MlpForward(t.aggregate, params.heads.quality);
  t.actionness = MlpForward(t.aggregate, params.heads.actionness);
  t.outputs = detail::FinishHeads(t.phi, t.quality, t.actionness);
  return t;
}

// What one video contributes to the objective.
struct TrainingTargets {
  std::vector<std::size_t> subset;          // DPP target frames y
  std::vector<ActionnessRank> frame_ranks;  // one per frame
};

struct LossOptions {
  double lambda = 0.003;
  // Divide the cross-entropy by the frame count before weighting.
  bool normalize_actionness = false;
};

struct LossBreakdown {
  double summarization = 0.0;  // S
  double regularizer = 0.0;    // R
  double joint = 0.0;          // S + lambda R
};

inline Matrix OneHotRanks(std::span<const ActionnessRank> ranks) {
  Matrix t(ranks.size(), kNumActionnessClasses);
  for (std::size_t i = 0; i < ranks.size(); ++i)
    t(i, static_cast<std::size_t>(ranks[i].value())) = 1.0;
  return t;
}

namespace detail {

inline double RegularizerScale(const LossOptions& options, std::size_t n) {
  return options.normalize_actionness ? 1.0 / static_cast<double>(n) : 1.0;
}

inline void CheckTargets(const TrainingTargets& targets, std::size_t n) {
  if (targets.frame_ranks.size() != n) {
    throw Error(ErrorCode::kShapeMismatch,
                "have " + std::to_string(targets.frame_ranks.size()) +
                    " rank targets for " + std::to_string(n) + " frames");
  }
}

}  // namespace detail

inline LossBreakdown EvaluateLoss(const ModelParameters& params,
                                  const Matrix& features,
                                  const TrainingTargets& targets,
                                  const LossOptions& options) {
  detail::CheckTargets(targets, features.rows());
  const ForwardTrace t = ModelForward(params, features);
  LossBreakdown loss;
  const DppKernel kernel = BuildDppKernel(t.outputs.phi, t.outputs.q);
  loss.summarization = DppMleLoss(kernel, targets.subset);
  loss.regularizer =
      ActionnessCrossEntropy(t.outputs.p, OneHotRanks(targets.frame_ranks)) *
      detail::RegularizerScale(options, features.rows());
  loss.joint =
      JointLoss(loss.summarization, loss.regularizer, options.lambda);
  return loss;
}

struct LossAndGradient {
  LossBreakdown loss;
  ModelParameters gradient;
};

// Joint loss and its exact gradient with respect to every parameter.
inline LossAndGradient ModelBackward(const ModelParameters& params,
                                     const Matrix& features,
                                     const TrainingTargets& targets,
                                     const LossOptions& options) {
  detail::CheckTargets(targets, features.rows());
  const std::size_t n = features.rows();
  const ForwardTrace t = ModelForward(params, features);
  const HeadOutputs& out = t.outputs;

  LossAndGradient result{{}, ModelParameters::Zeros(params.dims)};
  ModelParameters& grad = result.gradient;

  // Summarization term through L = B B^T with B = diag(q) Phi.
  const DppKernel kernel = BuildDppKernel(out.phi, out.q);
  result.loss.summarization = DppMleLoss(kernel, targets.subset);
  const Matrix d_kernel = DppMleGrad(kernel, targets.subset);
  Matrix d_b = MatMul(d_kernel, ScaleRows(out.phi, out.q));
  d_b *= 2.0;
  Matrix d_phi(n, params.dims.phi_dim);
  Matrix d_quality_logit(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto db_row = d_b.row(i);
    double dq = 0.0;
    for (std::size_t k = 0; k < db_row.size(); ++k) {
      d_phi(i, k) = out.q[i] * db_row[k];
      dq += out.phi(i, k) * db_row[k];
    }
    d_quality_logit(i, 0) = dq * out.q[i] * (1.0 - out.q[i]);
  }

  // Actionness term.
  const Matrix one_hot = OneHotRanks(targets.frame_ranks);
  const double scale = detail::RegularizerScale(options, n);
  result.loss.regularizer = ActionnessCrossEntropy(out.p, one_hot) * scale;
  Matrix d_action_logit = ActionnessCrossEntropyLogitGrad(out.p, one_hot);
  d_action_logit *= options.lambda * scale;
  result.loss.joint = JointLoss(result.loss.summarization,
                                result.loss.regularizer, options.lambda);

  Matrix d_aggregate =
      MlpBackward(t.aggregate, params.heads.phi, t.phi, d_phi, grad.heads.phi);
  d_aggregate += MlpBackward(t.aggregate, params.heads.quality, t.quality,
                             d_quality_logit, grad.heads.quality);
  d_aggregate += MlpBackward(t.aggregate, params.heads.actionness,
                             t.actionness, d_action_logit,
                             grad.heads.actionness);

  const std::size_t d = params.dims.input_dim;
  const std::size_t h = params.dims.hidden;
  Matrix d_fwd(n, h), d_bwd(n, h);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < h; ++j) {
      d_fwd(i, j) = d_aggregate(i, d + j);
      d_bwd(n - 1 - i, j) = d_aggregate(i, d + h + j);
    }
  }
  GruScanBackward(features, params.gru.forward, t.forward_scan, d_fwd,
                  grad.gru.forward);
  GruScanBackward(t.reversed_input, params.gru.backward, t.backward_scan,
                  d_bwd, grad.gru.backward);

  grad.for_each_tensor([](const std::string& name, const Matrix& m) {
    if (!m.all_finite()) {
      throw Error(ErrorCode::kNonFiniteValue, "gradient of " + name);
    }
  });
  return result;
}

}  // namespace actsum

#endif  // ACTSUM_MODEL_HPP_
