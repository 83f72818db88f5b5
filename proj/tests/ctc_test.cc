// tests/ctc_test.cc

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

#include "speechreg/ctc.h"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "test_util.h"

namespace speechreg {
namespace {

using testing::LatticeFromProbs;
using testing::RandomLattice;

// Every label sequence over ids 1..V with length <= max_len, shortest first.
std::vector<LabelSequence> AllLabelSequences(int V, size_t max_len) {
  std::vector<LabelSequence> out{{}};
  size_t begin = 0;
  for (size_t len = 1; len <= max_len; ++len) {
    const size_t end = out.size();
    for (size_t i = begin; i < end; ++i)
      for (int k = 1; k <= V; ++k) {
        auto l = out[i];
        l.push_back(k);
        out.push_back(l);
      }
    begin = end;
  }
  return out;
}

TEST(AlphabetTest, EncodesOneBased) {
  Alphabet a("abc");
  EXPECT_EQ(a.num_classes(), 4);
  EXPECT_EQ(a.Encode("cab"), (LabelSequence{3, 1, 2}));
  EXPECT_EQ(a.Decode({2, 2, 3}), "bbc");
}

TEST(AlphabetTest, RejectsDuplicatesAndUnknown) {
  EXPECT_THROW(Alphabet("aba"), ArgumentError);
  EXPECT_THROW(Alphabet(""), ArgumentError);
  Alphabet a("ab");
  try {
    a.Encode("abz");
    FAIL();
  } catch (const ArgumentError &e) {
    EXPECT_NE(std::string(e.what()).find("'z'"), std::string::npos);
  }
}

TEST(CtcLossTest, SingleFrameSinglePath) {
  const auto lat = LatticeFromProbs({{0.4, 0.6}});
  const auto r = CtcLoss(lat, {1});
  EXPECT_TRUE(r.feasible);
  EXPECT_NEAR(r.loss, -std::log(0.6), 1e-15);
  EXPECT_NEAR(r.loss, 0.5108, 1e-4);
}

TEST(CtcLossTest, RepeatNeedsSeparatingBlank) {
  const auto lat = LatticeFromProbs({{0.5, 0.5}, {0.5, 0.5}});
  const auto r = CtcLoss(lat, {1, 1});
  EXPECT_FALSE(r.feasible);
  EXPECT_TRUE(std::isinf(r.loss) && r.loss > 0);
  EXPECT_EQ(MinFramesForLabels({1, 1}), 3u);
  EXPECT_EQ(MinFramesForLabels({1, 2, 2, 2}), 6u);
}

TEST(CtcLossTest, MatchesBruteForceTwoLabels) {
  Rng rng(42);
  const auto lat = RandomLattice(4, 3, rng);
  const double fast = CtcLoss(lat, {1, 2}).loss;
  const double slow = BruteForceCtc(lat, {1, 2});
  EXPECT_NEAR(fast, slow, 1e-10 * std::fabs(slow));
}

TEST(CtcLossTest, ExhaustiveOracleEquivalence) {
  Rng rng(7);
  for (int V = 1; V <= 3; ++V)
    for (size_t T = 1; T <= 5; ++T) {
      const auto labels = AllLabelSequences(V, 3);
      for (int trial = 0; trial < 10; ++trial) {
        const auto lat = RandomLattice(T, V + 1, rng);
        for (const auto &l : labels) {
          const auto r = CtcLoss(lat, l);
          const double slow = BruteForceCtc(lat, l);
          if (!r.feasible) {
            EXPECT_TRUE(std::isinf(slow));
            continue;
          }
          ASSERT_NEAR(r.loss, slow, 1e-10 * std::max(1.0, std::fabs(slow)))
              << "V=" << V << " T=" << T << " |l|=" << l.size();
          EXPECT_GE(r.loss, 0.0);
        }
      }
    }
}

TEST(CtcLossTest, TotalProbabilityIsOne) {
  Rng rng(8);
  for (int V = 1; V <= 3; ++V)
    for (size_t T = 1; T <= 5; ++T) {
      const auto lat = RandomLattice(T, V + 1, rng);
      double total = 0.0;
      for (const auto &l : AllLabelSequences(V, T)) {
        const auto r = CtcLoss(lat, l);
        if (r.feasible) total += std::exp(-r.loss);
      }
      EXPECT_NEAR(total, 1.0, 1e-8) << "V=" << V << " T=" << T;
    }
}

TEST(CtcLossTest, AppendingFramesKeepsFeasibility) {
  Rng rng(9);
  const LabelSequence l{1, 1, 2};
  for (size_t T = 1; T <= 10; ++T) {
    const bool feasible = CtcLoss(RandomLattice(T, 3, rng), l).feasible;
    EXPECT_EQ(feasible, T >= 4);
  }
}

TEST(CtcLossTest, LongLatticeDoesNotUnderflow) {
  Rng rng(10);
  const auto lat = RandomLattice(1000, 6, rng, 3.0);
  LabelSequence l;
  for (int i = 0; i < 200; ++i) l.push_back(1 + i % 5);
  const auto r = CtcLoss(lat, l);
  ASSERT_TRUE(r.feasible);
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_GT(r.loss, 745.0);  // p(l) is far below the smallest double
  const auto fb = CtcForwardBackward(lat, l);
  EXPECT_TRUE(AllFinite(fb.grad));
}

TEST(CtcLossTest, RejectsBlankOrOutOfRangeLabels) {
  Rng rng(11);
  const auto lat = RandomLattice(3, 3, rng);
  EXPECT_THROW(CtcLoss(lat, {0}), ArgumentError);
  EXPECT_THROW(CtcLoss(lat, {3}), ArgumentError);
}

TEST(BruteForceTest, RefusesLargeInstances) {
  Rng rng(12);
  EXPECT_THROW(BruteForceCtc(RandomLattice(12, 5, rng), {1}), ArgumentError);
}

TEST(CtcGradTest, SingleFrameClosedForm) {
  const auto lat = LatticeFromProbs({{0.3, 0.5, 0.2}});
  const auto g = CtcGrad(lat, {1});
  EXPECT_NEAR(g.at(0, 0), 0.3, 1e-15);
  EXPECT_NEAR(g.at(0, 1), 0.5 - 1.0, 1e-15);
  EXPECT_NEAR(g.at(0, 2), 0.2, 1e-15);
}

TEST(CtcGradTest, InfeasibleThrows) {
  Rng rng(13);
  EXPECT_THROW(CtcGrad(RandomLattice(2, 2, rng), {1, 1}), ArgumentError);
}

TEST(CtcGradTest, PosteriorRowsSumToOne) {
  Rng rng(14);
  const auto fb = CtcForwardBackward(RandomLattice(9, 4, rng), {1, 3, 3, 2});
  for (size_t t = 0; t < 9; ++t) {
    double s = 0.0;
    for (size_t k = 0; k < 4; ++k) s += fb.posteriors.at(t, k);
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(CtcGradTest, MatchesCentralDifferences) {
  Rng rng(15);
  const double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    const size_t T = 5, K = 4;
    Tensor logits({T, K});
    for (auto &v : logits.vec()) v = 1.5 * rng.Normal();
    LabelSequence l;
    const size_t len = 1 + rng.UniformInt(3);
    for (size_t i = 0; i < len; ++i) l.push_back(1 + static_cast<int>(rng.UniformInt(3)));
    if (MinFramesForLabels(l) > T) continue;
    const auto analytic = CtcGrad(LogSoftmax(logits), l);
    double worst = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
      Tensor plus = logits, minus = logits;
      plus[i] += h;
      minus[i] -= h;
      const double numeric =
          (CtcLoss(LogSoftmax(plus), l).loss - CtcLoss(LogSoftmax(minus), l).loss) / (2 * h);
      worst = std::max(worst, testing::RelativeError(analytic[i], numeric));
    }
    EXPECT_LT(worst, 1e-6) << "trial " << trial;
  }
}

TEST(GreedyDecodeTest, CollapsesRepeatsAndBlanks) {
  // classes: blank, a, b
  auto frames = [](std::vector<int> argmax) {
    std::vector<std::vector<double>> rows;
    for (int k : argmax) {
      std::vector<double> r(3, 0.1);
      r[static_cast<size_t>(k)] = 0.8;
      rows.push_back(r);
    }
    return LatticeFromProbs(rows);
  };
  EXPECT_EQ(GreedyDecode(frames({0, 1, 1, 0, 2})), (LabelSequence{1, 2}));
  EXPECT_TRUE(GreedyDecode(frames({0, 0, 0})).empty());
  EXPECT_EQ(GreedyDecode(frames({1, 0, 1})), (LabelSequence{1, 1}));
}

TEST(LogSoftmaxTest, RowsNormalized) {
  Rng rng(16);
  const auto lat = RandomLattice(20, 7, rng, 30.0);
  EXPECT_LT(lat.MaxRowNormalizationError(), 1e-12);
}

}  // namespace
}  // namespace speechreg
