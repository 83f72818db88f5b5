// tests/layers_test.cc

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

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.h"

namespace speechreg {
namespace {

using testing::Dot;
using testing::MaxRelativeError;
using testing::NumericGradient;
using testing::RandomTensor;

// Direct six-loop correlation with zero padding.
Tensor NaiveConv(const Tensor &x, const Tensor &w, const Tensor *b, const ConvGeometry &g) {
  const size_t ci_n = x.dim(0), F = x.dim(1), T = x.dim(2);
  const size_t co_n = w.dim(0), kf = w.dim(2), kt = w.dim(3);
  const size_t fo_n = (F + 2 * g.pad_f - kf) / g.stride_f + 1;
  const size_t to_n = (T + 2 * g.pad_t - kt) / g.stride_t + 1;
  Tensor y({co_n, fo_n, to_n});
  for (size_t co = 0; co < co_n; ++co)
    for (size_t fo = 0; fo < fo_n; ++fo)
      for (size_t to = 0; to < to_n; ++to) {
        double acc = b ? (*b)[co] : 0.0;
        for (size_t ci = 0; ci < ci_n; ++ci)
          for (size_t i = 0; i < kf; ++i)
            for (size_t j = 0; j < kt; ++j) {
              const long f = static_cast<long>(fo * g.stride_f + i) - static_cast<long>(g.pad_f);
              const long t = static_cast<long>(to * g.stride_t + j) - static_cast<long>(g.pad_t);
              if (f < 0 || t < 0 || f >= static_cast<long>(F) || t >= static_cast<long>(T))
                continue;
              acc += w.at(co, ci, i, j) * x.at(ci, static_cast<size_t>(f), static_cast<size_t>(t));
            }
        y.at(co, fo, to) = acc;
      }
  return y;
}

void ExpectClose(const Tensor &a, const Tensor &b, double tol) {
  ASSERT_EQ(a.shape(), b.shape());
  for (size_t i = 0; i < a.size(); ++i) ASSERT_NEAR(a[i], b[i], tol) << "index " << i;
}

TEST(Conv2dTest, OneByOneIdentity) {
  Rng rng(1);
  const auto x = RandomTensor({1, 6, 7}, rng);
  const Tensor w({1, 1, 1, 1}, 1.0);
  EXPECT_EQ(Conv2dForward(x, w, nullptr, {}), x);
}

TEST(Conv2dTest, OnesFilterOnOnesInput) {
  const auto y = Conv2dForward(Tensor({1, 5, 5}, 1.0), Tensor({1, 1, 3, 3}, 1.0), nullptr, {});
  EXPECT_EQ(y.shape(), (Shape{1, 3, 3}));
  for (double v : y.values()) EXPECT_EQ(v, 9.0);
}

TEST(Conv2dTest, MatchesNaiveLoops) {
  Rng rng(2);
  const std::vector<ConvGeometry> geoms = {{1, 1, 0, 0}, {2, 2, 0, 0}, {2, 1, 1, 2}, {1, 3, 1, 1}};
  for (const auto &g : geoms) {
    const auto x = RandomTensor({3, 11, 9}, rng);
    const auto w = RandomTensor({4, 3, 3, 4}, rng);
    const auto b = RandomTensor({4}, rng);
    ExpectClose(Conv2dForward(x, w, &b, g), NaiveConv(x, w, &b, g), 1e-12);
  }
}

TEST(Conv2dTest, OutputSizeRule) {
  EXPECT_EQ(ConvOutputSize(257, 41, 2, 0), 109u);
  EXPECT_EQ(ConvOutputSize(11, 11, 2, 0), 1u);
  EXPECT_EQ(ConvOutputSize(10, 3, 1, 1), 10u);
  EXPECT_THROW(ConvOutputSize(10, 11, 2, 0), ArgumentError);
  EXPECT_THROW(Conv2dForward(Tensor({2, 5, 5}), Tensor({1, 3, 3, 3}), nullptr, {}),
               ArgumentError);
}

TEST(Conv2dTest, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  const ConvGeometry g{2, 1, 1, 0};
  auto x = RandomTensor({2, 7, 6}, rng);
  auto w = RandomTensor({3, 2, 3, 2}, rng);
  auto b = RandomTensor({3}, rng);
  const auto r = RandomTensor(Conv2dForward(x, w, &b, g).shape(), rng);
  auto f = [&] { return Dot(r, Conv2dForward(x, w, &b, g)); };
  Tensor dx, dw(w.shape()), db(b.shape());
  Conv2dBackward(x, w, r, g, &dx, &dw, &db);
  EXPECT_LT(MaxRelativeError(dx, NumericGradient(f, x)), 1e-4);
  EXPECT_LT(MaxRelativeError(dw, NumericGradient(f, w)), 1e-4);
  EXPECT_LT(MaxRelativeError(db, NumericGradient(f, b)), 1e-4);
}

TEST(SepConvTest, DeltaAndIdentityGiveStridedInput) {
  Rng rng(4);
  const auto x = RandomTensor({3, 9, 8}, rng);
  Tensor dw({3, 3, 3});
  for (size_t c = 0; c < 3; ++c) dw.at(c, 1, 1) = 1.0;
  Tensor pw({3, 3});
  for (size_t c = 0; c < 3; ++c) pw.at(c, c) = 1.0;
  const ConvGeometry g{2, 2, 1, 1};
  const auto y = SepConv2dForward(x, dw, pw, nullptr, g);
  ASSERT_EQ(y.shape(), (Shape{3, 5, 4}));
  for (size_t c = 0; c < 3; ++c)
    for (size_t f = 0; f < 5; ++f)
      for (size_t t = 0; t < 4; ++t) EXPECT_EQ(y.at(c, f, t), x.at(c, 2 * f, 2 * t));
}

TEST(SepConvTest, EqualsComposedDenseConv) {
  Rng rng(5);
  for (const ConvGeometry &g : {ConvGeometry{1, 1, 0, 0}, ConvGeometry{2, 2, 1, 1},
                                ConvGeometry{1, 2, 1, 0}}) {
    const size_t ci = 2, co = 3;
    const auto x = RandomTensor({ci, 8, 7}, rng);
    const auto dw = RandomTensor({ci, 3, 3}, rng);
    const auto pw = RandomTensor({co, ci}, rng);
    const auto b = RandomTensor({co}, rng);
    Tensor dense({co, ci, 3, 3});
    for (size_t o = 0; o < co; ++o)
      for (size_t i = 0; i < ci; ++i)
        for (size_t f = 0; f < 3; ++f)
          for (size_t t = 0; t < 3; ++t) dense.at(o, i, f, t) = pw.at(o, i) * dw.at(i, f, t);
    ExpectClose(SepConv2dForward(x, dw, pw, &b, g), NaiveConv(x, dense, &b, g), 1e-12);
  }
}

TEST(SepConvTest, ParameterCounts) {
  // n inputs, m outputs, w x h filter.
  EXPECT_EQ(SepConvParamCount(2, 3, 3, 3), 2u * 3 * 3 + 2 * 3 + 3);
  EXPECT_EQ(DenseConvParamCount(2, 3, 3, 3), 2u * 3 * 3 * 3 + 3);
  EXPECT_EQ(SepConvParamCount(32, 32, 3, 3), 32u * 9 + 32 * 32 + 32);
}

TEST(DepthwiseTest, GradientMatchesFiniteDifferences) {
  Rng rng(6);
  const ConvGeometry g{2, 1, 1, 1};
  auto x = RandomTensor({3, 7, 5}, rng);
  auto w = RandomTensor({3, 3, 3}, rng);
  const auto r = RandomTensor(DepthwiseConv2dForward(x, w, g).shape(), rng);
  auto f = [&] { return Dot(r, DepthwiseConv2dForward(x, w, g)); };
  Tensor dx, dw(w.shape());
  DepthwiseConv2dBackward(x, w, r, g, &dx, &dw);
  EXPECT_LT(MaxRelativeError(dx, NumericGradient(f, x)), 1e-4);
  EXPECT_LT(MaxRelativeError(dw, NumericGradient(f, w)), 1e-4);
}

TEST(PointwiseTest, GradientMatchesFiniteDifferences) {
  Rng rng(7);
  auto x = RandomTensor({3, 4, 5}, rng);
  auto w = RandomTensor({2, 3}, rng);
  auto b = RandomTensor({2}, rng);
  const auto r = RandomTensor({2, 4, 5}, rng);
  auto f = [&] { return Dot(r, PointwiseConvForward(x, w, &b)); };
  Tensor dx, dw(w.shape()), db(b.shape());
  PointwiseConvBackward(x, w, r, &dx, &dw, &db);
  EXPECT_LT(MaxRelativeError(dx, NumericGradient(f, x)), 1e-4);
  EXPECT_LT(MaxRelativeError(dw, NumericGradient(f, w)), 1e-4);
  EXPECT_LT(MaxRelativeError(db, NumericGradient(f, b)), 1e-4);
}

TEST(LinearTest, GradientMatchesFiniteDifferences) {
  Rng rng(8);
  auto x = RandomTensor({5, 4}, rng);
  auto w = RandomTensor({3, 4}, rng);
  auto b = RandomTensor({3}, rng);
  const auto r = RandomTensor({5, 3}, rng);
  auto f = [&] { return Dot(r, LinearForward(x, w, &b)); };
  Tensor dx, dw(w.shape()), db(b.shape());
  LinearBackward(x, w, r, &dx, &dw, &db);
  EXPECT_LT(MaxRelativeError(dx, NumericGradient(f, x)), 1e-4);
  EXPECT_LT(MaxRelativeError(dw, NumericGradient(f, w)), 1e-4);
  EXPECT_LT(MaxRelativeError(db, NumericGradient(f, b)), 1e-4);
}

TEST(ReluTest, GradientMatchesFiniteDifferences) {
  Rng rng(9);
  auto x = RandomTensor({20}, rng);
  for (auto &v : x.vec())
    if (std::fabs(v) < 0.01) v = 0.5;  // keep away from the kink
  const auto r = RandomTensor({20}, rng);
  auto f = [&] { return Dot(r, Relu(x)); };
  EXPECT_LT(MaxRelativeError(ReluBackward(Relu(x), r), NumericGradient(f, x)), 1e-4);
}

TEST(BatchNormTest, TrainOutputIsStandardized) {
  Rng rng(10);
  const auto a = RandomTensor({3, 4, 6}, rng, 2.0, 7.0);
  const auto b = RandomTensor({3, 4, 2}, rng, -5.0, 1.0);
  Tensor gamma({3}, 1.0), beta({3}), rm({3}), rv({3}, 1.0);
  const auto ys = BatchNormForward({&a, &b}, BnLayout::kChannelFirst, gamma, beta, rm, rv, true,
                                   nullptr);
  for (size_t c = 0; c < 3; ++c) {
    double s = 0, s2 = 0;
    for (const auto &y : ys)
      for (size_t i = 0; i < y.size() / 3; ++i) {
        const double v = y[c * (y.size() / 3) + i];
        s += v;
        s2 += v * v;
      }
    EXPECT_NEAR(s / 32, 0.0, 1e-12);
    EXPECT_NEAR(s2 / 32, 1.0, 1e-3);  // epsilon keeps it slightly below 1
  }
}

TEST(BatchNormTest, RunningStatisticsUseMomentum) {
  const Tensor x({4, 1}, std::vector<double>{1, 2, 3, 4});
  Tensor gamma({1}, 1.0), beta({1}), rm({1}), rv({1}, 1.0);
  BatchNormForward({&x}, BnLayout::kFeatureLast, gamma, beta, rm, rv, true, nullptr);
  EXPECT_NEAR(rm[0], 0.1 * 2.5, 1e-15);
  EXPECT_NEAR(rv[0], 0.9 + 0.1 * (5.0 / 3.0), 1e-15);  // unbiased variance 5/3
  const auto y = BatchNormForward({&x}, BnLayout::kFeatureLast, gamma, beta, rm, rv, false,
                                  nullptr);
  EXPECT_NEAR(y[0].at(0, 0), (1 - rm[0]) / std::sqrt(rv[0] + kBnEpsilon), 1e-15);
}

TEST(BatchNormTest, SingleSampleTrainingThrows) {
  const Tensor x({1, 3}, 1.0);
  Tensor gamma({3}, 1.0), beta({3}), rm({3}), rv({3}, 1.0);
  EXPECT_THROW(
      BatchNormForward({&x}, BnLayout::kFeatureLast, gamma, beta, rm, rv, true, nullptr),
      ArgumentError);
  EXPECT_NO_THROW(
      BatchNormForward({&x}, BnLayout::kFeatureLast, gamma, beta, rm, rv, false, nullptr));
}

void CheckBatchNormGradient(BnLayout layout, bool train, const std::vector<Shape> &shapes) {
  Rng rng(11);
  std::vector<Tensor> xs;
  for (const auto &s : shapes) xs.push_back(RandomTensor(s, rng, -2.0, 3.0));
  const size_t D = layout == BnLayout::kFeatureLast ? shapes[0][1] : shapes[0][0];
  auto gamma = RandomTensor({D}, rng, 0.5, 1.5);
  auto beta = RandomTensor({D}, rng);
  Tensor rm = RandomTensor({D}, rng), rv = RandomTensor({D}, rng, 0.5, 2.0);
  std::vector<Tensor> rs;
  for (const auto &s : shapes) rs.push_back(RandomTensor(s, rng));
  auto f = [&] {
    Tensor m = rm, v = rv;  // keep running stats fixed across probes
    std::vector<const Tensor *> ptrs;
    for (const auto &x : xs) ptrs.push_back(&x);
    const auto ys = BatchNormForward(ptrs, layout, gamma, beta, m, v, train, nullptr);
    double s = 0.0;
    for (size_t n = 0; n < ys.size(); ++n) s += Dot(rs[n], ys[n]);
    return s;
  };
  BatchNormCache cache;
  {
    Tensor m = rm, v = rv;
    std::vector<const Tensor *> ptrs;
    for (const auto &x : xs) ptrs.push_back(&x);
    BatchNormForward(ptrs, layout, gamma, beta, m, v, train, &cache);
  }
  Tensor dgamma({D}), dbeta({D});
  const auto dxs = BatchNormBackward(rs, layout, gamma, cache, &dgamma, &dbeta);
  for (size_t n = 0; n < xs.size(); ++n)
    EXPECT_LT(MaxRelativeError(dxs[n], NumericGradient(f, xs[n])), 1e-4) << "input " << n;
  EXPECT_LT(MaxRelativeError(dgamma, NumericGradient(f, gamma)), 1e-4);
  EXPECT_LT(MaxRelativeError(dbeta, NumericGradient(f, beta)), 1e-4);
}

TEST(BatchNormTest, GradientChannelFirstTrain) {
  CheckBatchNormGradient(BnLayout::kChannelFirst, true, {{2, 3, 4}, {2, 3, 2}});
}
TEST(BatchNormTest, GradientFeatureLastTrain) {
  CheckBatchNormGradient(BnLayout::kFeatureLast, true, {{4, 3}, {2, 3}});
}
TEST(BatchNormTest, GradientEval) {
  CheckBatchNormGradient(BnLayout::kFeatureLast, false, {{4, 3}});
}

TEST(GruTest, ZeroWeightsStayAtZero) {
  Rng rng(12);
  const auto x = RandomTensor({6, 3}, rng);
  const auto h = GruForward(x, Tensor({12, 3}), Tensor({12, 4}), Tensor({12}), false);
  for (double v : h.values()) EXPECT_EQ(v, 0.0);
}

TEST(GruTest, SingleStepMatchesCellFormula) {
  Rng rng(13);
  const size_t H = 3;
  const auto x = RandomTensor({1, 2}, rng);
  const auto w = RandomTensor({3 * H, 2}, rng);
  const auto u = RandomTensor({3 * H, H}, rng);
  const auto b = RandomTensor({3 * H}, rng);
  const auto h = GruForward(x, w, u, b, false);
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (size_t k = 0; k < H; ++k) {
    auto pre = [&](size_t row) { return w.at(row, 0) * x[0] + w.at(row, 1) * x[1] + b[row]; };
    // h' = 0, so recurrent terms vanish.
    const double z = sig(pre(k)), c = std::tanh(pre(2 * H + k));
    EXPECT_NEAR(h.at(0, k), (1 - z) * c, 1e-15);
  }
}

TEST(GruTest, GradientMatchesFiniteDifferences) {
  Rng rng(14);
  for (bool reverse : {false, true}) {
    const size_t T = 3, H = 4;
    auto a = RandomTensor({T, 3 * H}, rng, -1.5, 1.5);
    auto u = RandomTensor({3 * H, H}, rng, -0.8, 0.8);
    const auto r = RandomTensor({T, H}, rng);
    auto f = [&] { return Dot(r, GruRecurrenceForward(a, u, reverse, nullptr)); };
    GruCache cache;
    GruRecurrenceForward(a, u, reverse, &cache);
    Tensor da, du(u.shape());
    GruRecurrenceBackward(u, cache, r, &da, &du);
    EXPECT_LT(MaxRelativeError(da, NumericGradient(f, a)), 1e-5);
    EXPECT_LT(MaxRelativeError(du, NumericGradient(f, u)), 1e-5);
  }
}

TEST(GruTest, BidirectionalSymmetry) {
  Rng rng(15);
  const size_t T = 7, D = 3, H = 4;
  const auto x = RandomTensor({T, D}, rng);
  const auto wf = RandomTensor({3 * H, D}, rng), uf = RandomTensor({3 * H, H}, rng),
             bf = RandomTensor({3 * H}, rng);
  const auto wb = RandomTensor({3 * H, D}, rng), ub = RandomTensor({3 * H, H}, rng),
             bb = RandomTensor({3 * H}, rng);
  Tensor xr({T, D});
  for (size_t t = 0; t < T; ++t)
    for (size_t d = 0; d < D; ++d) xr.at(t, d) = x.at(T - 1 - t, d);
  const auto y = BiGruForward(x, wf, uf, bf, wb, ub, bb);
  const auto yr = BiGruForward(xr, wb, ub, bb, wf, uf, bf);
  for (size_t t = 0; t < T; ++t)
    for (size_t k = 0; k < H; ++k) {
      EXPECT_EQ(yr.at(t, k), y.at(T - 1 - t, H + k));
      EXPECT_EQ(yr.at(t, H + k), y.at(T - 1 - t, k));
    }
}

}  // namespace
}  // namespace speechreg
