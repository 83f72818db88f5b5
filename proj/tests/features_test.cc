// tests/features_test.cc

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

#include "speechreg/features.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "speechreg/common.h"
#include "speechreg/file_util.h"
#include "test_util.h"

namespace speechreg {
namespace {

using testing::MakeSine;

Spectrogram RandomSpec(size_t frames, size_t bins, uint64_t seed, double scale = 1.0,
                       double offset = 0.0) {
  Rng rng(seed);
  Spectrogram s;
  s.frames = frames;
  s.bins = bins;
  s.data.resize(frames * bins);
  for (auto &v : s.data) v = offset + scale * rng.Normal();
  return s;
}

void MeanVar(const std::vector<double> &v, double *mean, double *var) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= v.size();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  *mean = m;
  *var = s / v.size();
}

TEST(SpectrogramTest, OneSecondFraming) {
  const auto spec = ComputeSpectrogram(MakeSine(440, 1.0));
  EXPECT_EQ(spec.frames, 99u);
  EXPECT_EQ(spec.bins, 257u);
  const auto f = Framing(16000);
  EXPECT_EQ(f.window, 320u);
  EXPECT_EQ(f.hop, 160u);
  EXPECT_EQ(f.fft_size, 512u);
}

TEST(SpectrogramTest, SilenceIsLogFloor) {
  AudioBuffer silent{std::vector<double>(16000, 0.0), 16000};
  const auto spec = ComputeSpectrogram(silent);
  for (double v : spec.data) EXPECT_EQ(v, std::log(1e-10));
}

TEST(SpectrogramTest, OneKilohertzPeaksAtBin32) {
  const auto spec = ComputeSpectrogram(MakeSine(1000, 0.5));
  for (size_t t = 0; t < spec.frames; ++t) {
    size_t best = 0;
    for (size_t k = 1; k < spec.bins; ++k)
      if (spec.at(t, k) > spec.at(t, best)) best = k;
    EXPECT_EQ(best, 32u) << "frame " << t;
  }
}

TEST(SpectrogramTest, FramingCountLaw) {
  for (size_t len = 320; len < 2400; len += 37) {
    AudioBuffer b{std::vector<double>(len, 0.1), 16000};
    EXPECT_EQ(ComputeSpectrogram(b).frames, (len - 320) / 160 + 1) << len;
  }
}

TEST(SpectrogramTest, TooShortNamesMinimum) {
  AudioBuffer b{std::vector<double>(319, 0.1), 16000};
  try {
    ComputeSpectrogram(b);
    FAIL();
  } catch (const ArgumentError &e) {
    EXPECT_NE(std::string(e.what()).find("320"), std::string::npos) << e.what();
  }
}

TEST(NormalizeUtteranceTest, ConstantMapsToZeros) {
  Spectrogram s;
  s.frames = 4;
  s.bins = 3;
  s.data.assign(12, -3.7);
  for (double v : NormalizeUtterance(s).data) EXPECT_EQ(v, 0.0);
}

TEST(NormalizeUtteranceTest, ZeroMeanUnitVarianceIdempotentAffineInvariant) {
  const auto s = RandomSpec(50, 20, 7, 3.0, 2.0);
  const auto n = NormalizeUtterance(s);
  double mean, var;
  MeanVar(n.data, &mean, &var);
  EXPECT_NEAR(mean, 0.0, 1e-6);
  EXPECT_NEAR(var, 1.0, 1e-6);

  const auto twice = NormalizeUtterance(n);
  for (size_t i = 0; i < n.data.size(); ++i) EXPECT_NEAR(twice.data[i], n.data[i], 1e-6);

  Spectrogram affine = s;
  for (auto &v : affine.data) v = 5.0 * v + 3.0;
  const auto na = NormalizeUtterance(affine);
  for (size_t i = 0; i < n.data.size(); ++i) EXPECT_NEAR(na.data[i], n.data[i], 1e-9);
}

TEST(ComputeStatsTest, ConstantInput) {
  Spectrogram s;
  s.frames = 5;
  s.bins = 2;
  s.data.assign(10, 2.0);
  const auto stats = ComputeStats(std::span<const Spectrogram>(&s, 1));
  EXPECT_EQ(stats.count, 5u);
  for (size_t j = 0; j < 2; ++j) {
    EXPECT_EQ(stats.mean[j], 2.0);
    EXPECT_EQ(stats.variance[j], 0.0);
  }
}

TEST(ComputeStatsTest, TwoFramePopulationVariance) {
  Spectrogram s;
  s.frames = 2;
  s.bins = 1;
  s.data = {0.0, 2.0};
  const auto stats = ComputeStats(std::span<const Spectrogram>(&s, 1));
  EXPECT_EQ(stats.mean[0], 1.0);
  EXPECT_EQ(stats.variance[0], 1.0);
}

TEST(ComputeStatsTest, MatchesTwoPassOracleAndMerge) {
  std::vector<Spectrogram> specs;
  for (int i = 0; i < 10; ++i) specs.push_back(RandomSpec(100, 6, 100 + i, 2.0 + i, 50.0));
  const auto stats = ComputeStats(specs);
  ASSERT_EQ(stats.count, 1000u);

  // Two-pass reference.
  for (size_t j = 0; j < 6; ++j) {
    double sum = 0.0;
    for (const auto &s : specs)
      for (size_t t = 0; t < s.frames; ++t) sum += s.at(t, j);
    const double mean = sum / 1000.0;
    double ss = 0.0;
    for (const auto &s : specs)
      for (size_t t = 0; t < s.frames; ++t) ss += (s.at(t, j) - mean) * (s.at(t, j) - mean);
    const double var = ss / 1000.0;
    EXPECT_NEAR(stats.mean[j], mean, 1e-10 * std::fabs(mean));
    EXPECT_NEAR(stats.variance[j], var, 1e-10 * var);
  }

  StatsAccumulator a, b;
  for (int i = 0; i < 4; ++i) a.Add(specs[i]);
  for (int i = 4; i < 10; ++i) b.Add(specs[i]);
  a.Merge(b);
  const auto merged = a.Finish();
  for (size_t j = 0; j < 6; ++j) {
    EXPECT_NEAR(merged.mean[j], stats.mean[j], 1e-10 * std::fabs(stats.mean[j]));
    EXPECT_NEAR(merged.variance[j], stats.variance[j], 1e-10 * stats.variance[j]);
  }
}

TEST(ComputeStatsTest, EmptyStreamIsAnError) {
  EXPECT_THROW(ComputeStats(std::span<const Spectrogram>()), ArgumentError);
}

TEST(NormalizeFeaturesTest, PerBinFormulaAndMismatch) {
  const auto s = RandomSpec(3, 2, 1);
  FeatureStats stats{{1.0, -2.0}, {4.0, 0.0}, 10};
  const auto n = NormalizeFeatures(s, stats);
  for (size_t t = 0; t < 3; ++t) {
    EXPECT_DOUBLE_EQ(n.at(t, 0), (s.at(t, 0) - 1.0) / std::sqrt(4.0 + 1e-8));
    EXPECT_DOUBLE_EQ(n.at(t, 1), (s.at(t, 1) + 2.0) / std::sqrt(1e-8));
  }
  FeatureStats wrong{{0.0}, {1.0}, 1};
  EXPECT_THROW(NormalizeFeatures(s, wrong), ArgumentError);
}

TEST(StatsFormatTest, LittleEndianLayout) {
  FeatureStats stats{{1.5, -2.0}, {0.25, 3.0}, 7};
  const auto bytes = SerializeStats(stats);
  ASSERT_EQ(bytes.size(), 4u + 4 * 8);
  EXPECT_EQ(bytes[0], 2);
  EXPECT_EQ(bytes[1], 0);
  double first;
  std::memcpy(&first, bytes.data() + 4, 8);  // host is little-endian here
  EXPECT_EQ(first, 1.5);
  double third;
  std::memcpy(&third, bytes.data() + 4 + 16, 8);
  EXPECT_EQ(third, 0.25);

  testing::TempDir dir;
  SaveStats(stats, dir / "stats.bin");
  const auto back = LoadStats(dir / "stats.bin");
  EXPECT_EQ(back.mean, stats.mean);
  EXPECT_EQ(back.variance, stats.variance);

  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(DeserializeStats(truncated), ParseError);
}

TEST(FeatureFileTest, RoundTrip) {
  const auto s = RandomSpec(7, 5, 3);
  testing::TempDir dir;
  SaveSpectrogram(s, dir / "a.feat");
  const auto back = LoadSpectrogram(dir / "a.feat");
  EXPECT_EQ(back.frames, 7u);
  EXPECT_EQ(back.bins, 5u);
  EXPECT_EQ(back.data, s.data);
}

}  // namespace
}  // namespace speechreg
