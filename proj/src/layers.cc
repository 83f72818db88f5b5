// src/layers.cc

// Copyright 2026  The speechreg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "speechreg/layers.h"

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "speechreg/common.h"

namespace speechreg {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

ConstMatrixMap AsMatrix(const Tensor &t, size_t rows, size_t cols) {
  return ConstMatrixMap(t.data(), static_cast<Eigen::Index>(rows),
                        static_cast<Eigen::Index>(cols));
}
MatrixMap AsMatrix(Tensor &t, size_t rows, size_t cols) {
  return MatrixMap(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void RequireRank(const Tensor &t, size_t rank, const char *what) {
  if (t.rank() != rank)
    throw ArgumentError(std::string(what) + ": expected rank " + std::to_string(rank) +
                        ", got " + ShapeToString(t.shape()));
}

// Columns of the unrolled input: row (ci, i, j), column (fo, to).
Matrix Im2Col(const Tensor &x, size_t kf, size_t kt, const ConvGeometry &g, size_t fo_n,
              size_t to_n) {
  const size_t C = x.dim(0), F = x.dim(1), T = x.dim(2);
  Matrix cols = Matrix::Zero(static_cast<Eigen::Index>(C * kf * kt),
                             static_cast<Eigen::Index>(fo_n * to_n));
  for (size_t c = 0; c < C; ++c)
    for (size_t i = 0; i < kf; ++i)
      for (size_t j = 0; j < kt; ++j) {
        double *row = cols.row(static_cast<Eigen::Index>((c * kf + i) * kt + j)).data();
        for (size_t fo = 0; fo < fo_n; ++fo) {
          const long f = static_cast<long>(fo * g.stride_f + i) - static_cast<long>(g.pad_f);
          if (f < 0 || f >= static_cast<long>(F)) continue;
          const double *src = &x.at(c, static_cast<size_t>(f), 0);
          for (size_t to = 0; to < to_n; ++to) {
            const long t = static_cast<long>(to * g.stride_t + j) - static_cast<long>(g.pad_t);
            if (t >= 0 && t < static_cast<long>(T)) row[fo * to_n + to] = src[t];
          }
        }
      }
  return cols;
}

void Col2Im(const Matrix &cols, size_t kf, size_t kt, const ConvGeometry &g, size_t fo_n,
            size_t to_n, Tensor *dx) {
  const size_t C = dx->dim(0), F = dx->dim(1), T = dx->dim(2);
  dx->Fill(0.0);
  for (size_t c = 0; c < C; ++c)
    for (size_t i = 0; i < kf; ++i)
      for (size_t j = 0; j < kt; ++j) {
        const double *row = cols.row(static_cast<Eigen::Index>((c * kf + i) * kt + j)).data();
        for (size_t fo = 0; fo < fo_n; ++fo) {
          const long f = static_cast<long>(fo * g.stride_f + i) - static_cast<long>(g.pad_f);
          if (f < 0 || f >= static_cast<long>(F)) continue;
          double *dst = &dx->at(c, static_cast<size_t>(f), 0);
          for (size_t to = 0; to < to_n; ++to) {
            const long t = static_cast<long>(to * g.stride_t + j) - static_cast<long>(g.pad_t);
            if (t >= 0 && t < static_cast<long>(T)) dst[t] += row[fo * to_n + to];
          }
        }
      }
}

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

size_t ConvOutputSize(size_t in, size_t filter, size_t stride, size_t pad) {
  if (stride == 0) throw ArgumentError("conv: stride must be positive");
  if (in + 2 * pad < filter)
    throw ArgumentError("conv: input extent " + std::to_string(in) + " (padding " +
                        std::to_string(pad) + ") is smaller than filter " +
                        std::to_string(filter));
  return (in + 2 * pad - filter) / stride + 1;
}

Tensor Conv2dForward(const Tensor &x, const Tensor &w, const Tensor *b, const ConvGeometry &g) {
  RequireRank(x, 3, "conv2d input");
  RequireRank(w, 4, "conv2d weight");
  if (w.dim(1) != x.dim(0))
    throw ArgumentError("conv2d: weight expects " + std::to_string(w.dim(1)) +
                        " input channels, input has " + std::to_string(x.dim(0)));
  const size_t co = w.dim(0), kf = w.dim(2), kt = w.dim(3);
  if (b) CheckShape(*b, {co}, "conv2d bias");
  const size_t fo = ConvOutputSize(x.dim(1), kf, g.stride_f, g.pad_f);
  const size_t to = ConvOutputSize(x.dim(2), kt, g.stride_t, g.pad_t);
  const Matrix cols = Im2Col(x, kf, kt, g, fo, to);
  Tensor y({co, fo, to});
  auto ym = AsMatrix(y, co, fo * to);
  ym.noalias() = AsMatrix(w, co, w.size() / co) * cols;
  if (b) ym.colwise() += ConstVectorMap(b->data(), static_cast<Eigen::Index>(co));
  return y;
}

void Conv2dBackward(const Tensor &x, const Tensor &w, const Tensor &dy, const ConvGeometry &g,
                    Tensor *dx, Tensor *dw, Tensor *db) {
  const size_t co = w.dim(0), kf = w.dim(2), kt = w.dim(3);
  const size_t fo = dy.dim(1), to = dy.dim(2);
  const auto dym = AsMatrix(dy, co, fo * to);
  const size_t k = w.size() / co;
  if (dw || dx) {
    const Matrix cols = Im2Col(x, kf, kt, g, fo, to);
    if (dw) AsMatrix(*dw, co, k).noalias() += dym * cols.transpose();
  }
  if (db) VectorMap(db->data(), static_cast<Eigen::Index>(co)) += dym.rowwise().sum();
  if (dx) {
    const Matrix dcols = AsMatrix(w, co, k).transpose() * dym;
    *dx = Tensor(x.shape());
    Col2Im(dcols, kf, kt, g, fo, to, dx);
  }
}

Tensor DepthwiseConv2dForward(const Tensor &x, const Tensor &w, const ConvGeometry &g) {
  RequireRank(x, 3, "depthwise input");
  RequireRank(w, 3, "depthwise weight");
  if (w.dim(0) != x.dim(0))
    throw ArgumentError("depthwise: weight has " + std::to_string(w.dim(0)) +
                        " channels, input has " + std::to_string(x.dim(0)));
  const size_t C = x.dim(0), F = x.dim(1), T = x.dim(2), kf = w.dim(1), kt = w.dim(2);
  const size_t fo_n = ConvOutputSize(F, kf, g.stride_f, g.pad_f);
  const size_t to_n = ConvOutputSize(T, kt, g.stride_t, g.pad_t);
  Tensor y({C, fo_n, to_n});
  for (size_t c = 0; c < C; ++c)
    for (size_t i = 0; i < kf; ++i)
      for (size_t j = 0; j < kt; ++j) {
        const double wv = w.at(c, i, j);
        for (size_t fo = 0; fo < fo_n; ++fo) {
          const long f = static_cast<long>(fo * g.stride_f + i) - static_cast<long>(g.pad_f);
          if (f < 0 || f >= static_cast<long>(F)) continue;
          const double *src = &x.at(c, static_cast<size_t>(f), 0);
          double *dst = &y.at(c, fo, 0);
          for (size_t to = 0; to < to_n; ++to) {
            const long t = static_cast<long>(to * g.stride_t + j) - static_cast<long>(g.pad_t);
            if (t >= 0 && t < static_cast<long>(T)) dst[to] += wv * src[t];
          }
        }
      }
  return y;
}

void DepthwiseConv2dBackward(const Tensor &x, const Tensor &w, const Tensor &dy,
                             const ConvGeometry &g, Tensor *dx, Tensor *dw) {
  const size_t C = x.dim(0), F = x.dim(1), T = x.dim(2), kf = w.dim(1), kt = w.dim(2);
  const size_t fo_n = dy.dim(1), to_n = dy.dim(2);
  if (dx) *dx = Tensor(x.shape());
  for (size_t c = 0; c < C; ++c)
    for (size_t i = 0; i < kf; ++i)
      for (size_t j = 0; j < kt; ++j) {
        const double wv = w.at(c, i, j);
        double acc = 0.0;
        for (size_t fo = 0; fo < fo_n; ++fo) {
          const long f = static_cast<long>(fo * g.stride_f + i) - static_cast<long>(g.pad_f);
          if (f < 0 || f >= static_cast<long>(F)) continue;
          const double *src = &x.at(c, static_cast<size_t>(f), 0);
          const double *grad = &dy.at(c, fo, 0);
          double *dsrc = dx ? &dx->at(c, static_cast<size_t>(f), 0) : nullptr;
          for (size_t to = 0; to < to_n; ++to) {
            const long t = static_cast<long>(to * g.stride_t + j) - static_cast<long>(g.pad_t);
            if (t < 0 || t >= static_cast<long>(T)) continue;
            acc += grad[to] * src[t];
            if (dsrc) dsrc[t] += wv * grad[to];
          }
        }
        if (dw) dw->at(c, i, j) += acc;
      }
}

Tensor PointwiseConvForward(const Tensor &x, const Tensor &w, const Tensor *b) {
  RequireRank(x, 3, "pointwise input");
  RequireRank(w, 2, "pointwise weight");
  if (w.dim(1) != x.dim(0))
    throw ArgumentError("pointwise: weight expects " + std::to_string(w.dim(1)) +
                        " input channels, input has " + std::to_string(x.dim(0)));
  const size_t ci = x.dim(0), co = w.dim(0), n = x.dim(1) * x.dim(2);
  if (b) CheckShape(*b, {co}, "pointwise bias");
  Tensor y({co, x.dim(1), x.dim(2)});
  auto ym = AsMatrix(y, co, n);
  ym.noalias() = AsMatrix(w, co, ci) * AsMatrix(x, ci, n);
  if (b) ym.colwise() += ConstVectorMap(b->data(), static_cast<Eigen::Index>(co));
  return y;
}

void PointwiseConvBackward(const Tensor &x, const Tensor &w, const Tensor &dy, Tensor *dx,
                           Tensor *dw, Tensor *db) {
  const size_t ci = x.dim(0), co = w.dim(0), n = x.dim(1) * x.dim(2);
  const auto dym = AsMatrix(dy, co, n);
  if (dw) AsMatrix(*dw, co, ci).noalias() += dym * AsMatrix(x, ci, n).transpose();
  if (db) VectorMap(db->data(), static_cast<Eigen::Index>(co)) += dym.rowwise().sum();
  if (dx) {
    *dx = Tensor(x.shape());
    AsMatrix(*dx, ci, n).noalias() = AsMatrix(w, co, ci).transpose() * dym;
  }
}

Tensor SepConv2dForward(const Tensor &x, const Tensor &w_depthwise, const Tensor &w_pointwise,
                        const Tensor *b, const ConvGeometry &g) {
  return PointwiseConvForward(DepthwiseConv2dForward(x, w_depthwise, g), w_pointwise, b);
}

size_t SepConvParamCount(size_t in_channels, size_t out_channels, size_t kf, size_t kt) {
  return in_channels * kf * kt + in_channels * out_channels + out_channels;
}

size_t DenseConvParamCount(size_t in_channels, size_t out_channels, size_t kf, size_t kt) {
  return in_channels * out_channels * kf * kt + out_channels;
}

Tensor LinearForward(const Tensor &x, const Tensor &w, const Tensor *b) {
  RequireRank(x, 2, "linear input");
  RequireRank(w, 2, "linear weight");
  if (w.dim(1) != x.dim(1))
    throw ArgumentError("linear: weight expects " + std::to_string(w.dim(1)) +
                        " inputs, got " + std::to_string(x.dim(1)));
  const size_t n = x.dim(0), in = x.dim(1), out = w.dim(0);
  if (b) CheckShape(*b, {out}, "linear bias");
  Tensor y({n, out});
  auto ym = AsMatrix(y, n, out);
  ym.noalias() = AsMatrix(x, n, in) * AsMatrix(w, out, in).transpose();
  if (b) ym.rowwise() += ConstVectorMap(b->data(), static_cast<Eigen::Index>(out)).transpose();
  return y;
}

void LinearBackward(const Tensor &x, const Tensor &w, const Tensor &dy, Tensor *dx, Tensor *dw,
                    Tensor *db) {
  const size_t n = x.dim(0), in = x.dim(1), out = w.dim(0);
  const auto dym = AsMatrix(dy, n, out);
  if (dw) AsMatrix(*dw, out, in).noalias() += dym.transpose() * AsMatrix(x, n, in);
  if (db) VectorMap(db->data(), static_cast<Eigen::Index>(out)) += dym.colwise().sum().transpose();
  if (dx) {
    *dx = Tensor(x.shape());
    AsMatrix(*dx, n, in).noalias() = dym * AsMatrix(w, out, in);
  }
}

Tensor Relu(const Tensor &x) {
  Tensor y = x;
  for (auto &v : y.vec()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor ReluBackward(const Tensor &y, const Tensor &dy) {
  Tensor dx = dy;
  for (size_t i = 0; i < dx.size(); ++i)
    if (!(y[i] > 0.0)) dx[i] = 0.0;
  return dx;
}

namespace {

// Feature count and a visitor over (feature, flat index) for one tensor.
size_t BnFeatures(const Tensor &x, BnLayout layout) {
  if (layout == BnLayout::kFeatureLast) {
    RequireRank(x, 2, "batchnorm input");
    return x.dim(1);
  }
  if (x.rank() < 2) throw ArgumentError("batchnorm: channel-first input needs rank >= 2");
  return x.dim(0);
}

template <typename Fn>
void ForEachByFeature(const Tensor &x, BnLayout layout, Fn &&fn) {
  const size_t D = BnFeatures(x, layout);
  if (layout == BnLayout::kFeatureLast) {
    const size_t n = x.dim(0);
    for (size_t r = 0; r < n; ++r)
      for (size_t d = 0; d < D; ++d) fn(d, r * D + d);
  } else {
    const size_t inner = x.size() / D;
    for (size_t d = 0; d < D; ++d)
      for (size_t i = 0; i < inner; ++i) fn(d, d * inner + i);
  }
}

}  // namespace

std::vector<Tensor> BatchNormForward(const std::vector<const Tensor *> &xs, BnLayout layout,
                                     const Tensor &gamma, const Tensor &beta,
                                     Tensor &running_mean, Tensor &running_var, bool train,
                                     BatchNormCache *cache) {
  if (xs.empty()) throw ArgumentError("batchnorm: empty batch");
  const size_t D = BnFeatures(*xs.front(), layout);
  for (const Tensor *x : xs)
    if (BnFeatures(*x, layout) != D)
      throw ArgumentError("batchnorm: inconsistent feature count across the batch");
  CheckShape(gamma, {D}, "batchnorm gamma");
  CheckShape(beta, {D}, "batchnorm beta");

  std::vector<double> mean(D, 0.0), var(D, 0.0);
  if (train) {
    // Two passes in a fixed order keep the statistics reproducible.
    size_t count = 0;
    for (const Tensor *x : xs) {
      ForEachByFeature(*x, layout, [&](size_t d, size_t i) { mean[d] += (*x)[i]; });
      count += x->size() / D;
    }
    if (count < 2)
      throw ArgumentError("batchnorm: training needs at least 2 values per feature, got " +
                          std::to_string(count));
    for (auto &m : mean) m /= static_cast<double>(count);
    for (const Tensor *x : xs)
      ForEachByFeature(*x, layout, [&](size_t d, size_t i) {
        const double c = (*x)[i] - mean[d];
        var[d] += c * c;
      });
    for (auto &v : var) v /= static_cast<double>(count);
    const double unbias = static_cast<double>(count) / static_cast<double>(count - 1);
    for (size_t d = 0; d < D; ++d) {
      running_mean[d] = kBnMomentum * running_mean[d] + (1.0 - kBnMomentum) * mean[d];
      running_var[d] = kBnMomentum * running_var[d] + (1.0 - kBnMomentum) * var[d] * unbias;
    }
  } else {
    for (size_t d = 0; d < D; ++d) {
      mean[d] = running_mean[d];
      var[d] = running_var[d];
    }
  }

  std::vector<double> inv_std(D);
  for (size_t d = 0; d < D; ++d) inv_std[d] = 1.0 / std::sqrt(var[d] + kBnEpsilon);

  std::vector<Tensor> ys;
  ys.reserve(xs.size());
  if (cache) {
    cache->xhat.clear();
    cache->inv_std = inv_std;
    cache->train = train;
  }
  for (const Tensor *x : xs) {
    Tensor xhat(x->shape()), y(x->shape());
    ForEachByFeature(*x, layout, [&](size_t d, size_t i) {
      xhat[i] = ((*x)[i] - mean[d]) * inv_std[d];
      y[i] = gamma[d] * xhat[i] + beta[d];
    });
    if (cache) cache->xhat.push_back(std::move(xhat));
    ys.push_back(std::move(y));
  }
  return ys;
}

std::vector<Tensor> BatchNormBackward(const std::vector<Tensor> &dys, BnLayout layout,
                                      const Tensor &gamma, const BatchNormCache &cache,
                                      Tensor *dgamma, Tensor *dbeta) {
  const size_t D = cache.inv_std.size();
  std::vector<double> sum_dy(D, 0.0), sum_dy_xhat(D, 0.0);
  size_t count = 0;
  for (size_t n = 0; n < dys.size(); ++n) {
    const Tensor &dy = dys[n], &xh = cache.xhat[n];
    ForEachByFeature(dy, layout, [&](size_t d, size_t i) {
      sum_dy[d] += dy[i];
      sum_dy_xhat[d] += dy[i] * xh[i];
    });
    count += dy.size() / D;
  }
  for (size_t d = 0; d < D; ++d) {
    if (dgamma) (*dgamma)[d] += sum_dy_xhat[d];
    if (dbeta) (*dbeta)[d] += sum_dy[d];
  }
  std::vector<Tensor> dxs;
  dxs.reserve(dys.size());
  const double m = static_cast<double>(count);
  for (size_t n = 0; n < dys.size(); ++n) {
    const Tensor &dy = dys[n], &xh = cache.xhat[n];
    Tensor dx(dy.shape());
    if (cache.train) {
      ForEachByFeature(dy, layout, [&](size_t d, size_t i) {
        dx[i] = gamma[d] * cache.inv_std[d] *
                (dy[i] - sum_dy[d] / m - xh[i] * sum_dy_xhat[d] / m);
      });
    } else {
      ForEachByFeature(dy, layout,
                       [&](size_t d, size_t i) { dx[i] = gamma[d] * cache.inv_std[d] * dy[i]; });
    }
    dxs.push_back(std::move(dx));
  }
  return dxs;
}

Tensor GruRecurrenceForward(const Tensor &a, const Tensor &u, bool reverse, GruCache *cache) {
  RequireRank(a, 2, "gru projections");
  RequireRank(u, 2, "gru recurrent weight");
  const size_t T = a.dim(0), H = u.dim(1);
  if (u.dim(0) != 3 * H || a.dim(1) != 3 * H)
    throw ArgumentError("gru: expected projections [T, " + std::to_string(3 * H) +
                        "] and recurrent weight [" + std::to_string(3 * H) + ", " +
                        std::to_string(H) + "]");
  GruCache local;
  GruCache &c = cache ? *cache : local;
  c.reverse = reverse;
  c.z = Tensor({T, H});
  c.r = Tensor({T, H});
  c.c = Tensor({T, H});
  c.h = Tensor({T, H});

  const auto um = AsMatrix(u, 3 * H, H);
  const auto uzr = um.topRows(static_cast<Eigen::Index>(2 * H));
  const auto uc = um.bottomRows(static_cast<Eigen::Index>(H));
  Eigen::VectorXd hp = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(H));
  Eigen::VectorXd gates(2 * H), q(H), cand(H);
  for (size_t step = 0; step < T; ++step) {
    const size_t t = reverse ? T - 1 - step : step;
    const double *at = &a.at(t, 0);
    gates.noalias() = uzr * hp;
    for (size_t k = 0; k < H; ++k) {
      const auto ki = static_cast<Eigen::Index>(k);
      c.z.at(t, k) = Sigmoid(at[k] + gates[ki]);
      c.r.at(t, k) = Sigmoid(at[H + k] + gates[static_cast<Eigen::Index>(H + k)]);
      q[ki] = c.r.at(t, k) * hp[ki];
    }
    cand.noalias() = uc * q;
    for (size_t k = 0; k < H; ++k) {
      const auto ki = static_cast<Eigen::Index>(k);
      const double cv = std::tanh(at[2 * H + k] + cand[ki]);
      const double z = c.z.at(t, k);
      c.c.at(t, k) = cv;
      hp[ki] = z * hp[ki] + (1.0 - z) * cv;
      c.h.at(t, k) = hp[ki];
    }
  }
  return c.h;
}

void GruRecurrenceBackward(const Tensor &u, const GruCache &cache, const Tensor &dh, Tensor *da,
                           Tensor *du) {
  const size_t T = cache.h.dim(0), H = cache.h.dim(1);
  const auto um = AsMatrix(u, 3 * H, H);
  *da = Tensor({T, 3 * H});
  Matrix dum = Matrix::Zero(static_cast<Eigen::Index>(3 * H), static_cast<Eigen::Index>(H));
  Eigen::VectorXd carry = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(H));
  Eigen::VectorXd hp(H), q(H), dpre(3 * H), dq(H), dhp(H);
  for (size_t step = T; step-- > 0;) {
    const size_t t = cache.reverse ? T - 1 - step : step;
    const bool first = step == 0;
    const size_t prev = cache.reverse ? t + 1 : t - 1;
    for (size_t k = 0; k < H; ++k) {
      const auto ki = static_cast<Eigen::Index>(k);
      hp[ki] = first ? 0.0 : cache.h.at(prev, k);
      q[ki] = cache.r.at(t, k) * hp[ki];
    }
    // Candidate and update gate.
    for (size_t k = 0; k < H; ++k) {
      const auto ki = static_cast<Eigen::Index>(k);
      const double g = dh.at(t, k) + carry[ki];
      const double z = cache.z.at(t, k), cv = cache.c.at(t, k);
      dhp[ki] = g * z;
      dpre[static_cast<Eigen::Index>(2 * H + k)] = g * (1.0 - z) * (1.0 - cv * cv);
      dpre[ki] = g * (hp[ki] - cv) * z * (1.0 - z);
    }
    const auto dpre_c = dpre.tail(static_cast<Eigen::Index>(H));
    dq.noalias() = um.bottomRows(static_cast<Eigen::Index>(H)).transpose() * dpre_c;
    for (size_t k = 0; k < H; ++k) {
      const auto ki = static_cast<Eigen::Index>(k);
      const double r = cache.r.at(t, k);
      dhp[ki] += dq[ki] * r;
      dpre[static_cast<Eigen::Index>(H + k)] = dq[ki] * hp[ki] * r * (1.0 - r);
    }
    const auto dpre_zr = dpre.head(static_cast<Eigen::Index>(2 * H));
    dhp.noalias() += um.topRows(static_cast<Eigen::Index>(2 * H)).transpose() * dpre_zr;
    dum.topRows(static_cast<Eigen::Index>(2 * H)).noalias() += dpre_zr * hp.transpose();
    dum.bottomRows(static_cast<Eigen::Index>(H)).noalias() += dpre_c * q.transpose();
    for (size_t k = 0; k < 3 * H; ++k) da->at(t, k) = dpre[static_cast<Eigen::Index>(k)];
    carry = dhp;
  }
  if (du) AsMatrix(*du, 3 * H, H) += dum;
}

Tensor GruForward(const Tensor &x, const Tensor &w, const Tensor &u, const Tensor &b,
                  bool reverse) {
  return GruRecurrenceForward(LinearForward(x, w, &b), u, reverse, nullptr);
}

Tensor BiGruForward(const Tensor &x, const Tensor &w_f, const Tensor &u_f, const Tensor &b_f,
                    const Tensor &w_b, const Tensor &u_b, const Tensor &b_b) {
  const Tensor hf = GruForward(x, w_f, u_f, b_f, false);
  const Tensor hb = GruForward(x, w_b, u_b, b_b, true);
  const size_t T = hf.dim(0), H = hf.dim(1);
  Tensor out({T, 2 * H});
  for (size_t t = 0; t < T; ++t)
    for (size_t k = 0; k < H; ++k) {
      out.at(t, k) = hf.at(t, k);
      out.at(t, H + k) = hb.at(t, k);
    }
  return out;
}

}  // namespace speechreg
