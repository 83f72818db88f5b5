// src/features.cc

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

#include <cmath>
#include <complex>
#include <numbers>

#include "speechreg/common.h"
#include "speechreg/fft.h"
#include "speechreg/file_util.h"

namespace speechreg {

FramingInfo Framing(int sample_rate) {
  if (sample_rate <= 0) throw ArgumentError("spectrogram: sample rate must be positive");
  FramingInfo f;
  f.window = static_cast<size_t>(std::lround(kFrameMs * sample_rate / 1000.0));
  f.hop = static_cast<size_t>(std::lround(kHopMs * sample_rate / 1000.0));
  f.fft_size = NextPowerOfTwo(f.window);
  f.bins = f.fft_size / 2 + 1;
  return f;
}

Spectrogram ComputeSpectrogram(const AudioBuffer &buffer) {
  const FramingInfo f = Framing(buffer.sample_rate);
  const size_t len = buffer.samples.size();
  if (len < f.window)
    throw ArgumentError("spectrogram: buffer has " + std::to_string(len) +
                        " samples, at least " + std::to_string(f.window) +
                        " required for one 20 ms window");
  Spectrogram spec;
  spec.sample_rate = buffer.sample_rate;
  spec.bins = f.bins;
  spec.frames = (len - f.window) / f.hop + 1;
  spec.data.resize(spec.frames * spec.bins);

  std::vector<double> window(f.window);
  for (size_t i = 0; i < f.window; ++i)
    window[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (f.window - 1));

  std::vector<std::complex<double>> buf(f.fft_size);
  for (size_t t = 0; t < spec.frames; ++t) {
    const double *x = buffer.samples.data() + t * f.hop;
    for (size_t i = 0; i < f.fft_size; ++i)
      buf[i] = i < f.window ? x[i] * window[i] : 0.0;
    Fft(buf);
    for (size_t k = 0; k < f.bins; ++k)
      spec.at(t, k) = std::log(std::norm(buf[k]) + kLogPowerFloor);
  }
  return spec;
}

Spectrogram NormalizeUtterance(const Spectrogram &spec) {
  Spectrogram out = spec;
  const size_t n = spec.data.size();
  if (n == 0) return out;
  double mean = 0.0;
  for (double v : spec.data) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : spec.data) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  // Treat rounding-level spread around a constant as zero variance.
  if (!(var > 1e-20 * std::max(1.0, mean * mean))) {
    std::fill(out.data.begin(), out.data.end(), 0.0);
    return out;
  }
  const double inv_std = 1.0 / std::sqrt(var);
  for (auto &v : out.data) v = (v - mean) * inv_std;
  return out;
}

void StatsAccumulator::AddFrame(std::span<const double> frame) {
  if (count_ == 0 && mean_.empty()) {
    mean_.assign(frame.size(), 0.0);
    m2_.assign(frame.size(), 0.0);
  }
  if (frame.size() != mean_.size())
    throw ArgumentError("feature stats: frame has " + std::to_string(frame.size()) +
                        " bins, expected " + std::to_string(mean_.size()));
  ++count_;
  const double n = static_cast<double>(count_);
  for (size_t j = 0; j < frame.size(); ++j) {
    const double delta = frame[j] - mean_[j];
    mean_[j] += delta / n;
    m2_[j] += delta * (frame[j] - mean_[j]);
  }
}

void StatsAccumulator::Add(const Spectrogram &spec) {
  for (size_t t = 0; t < spec.frames; ++t) AddFrame(spec.frame(t));
}

void StatsAccumulator::Merge(const StatsAccumulator &other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  if (other.mean_.size() != mean_.size())
    throw ArgumentError("feature stats: cannot merge accumulators of different widths");
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  for (size_t j = 0; j < mean_.size(); ++j) {
    const double delta = other.mean_[j] - mean_[j];
    mean_[j] += delta * nb / n;
    m2_[j] += other.m2_[j] + delta * delta * na * nb / n;
  }
  count_ += other.count_;
}

FeatureStats StatsAccumulator::Finish() const {
  if (count_ == 0) throw ArgumentError("feature stats: no frames accumulated");
  FeatureStats stats;
  stats.mean = mean_;
  stats.variance.resize(m2_.size());
  for (size_t j = 0; j < m2_.size(); ++j)
    stats.variance[j] = std::max(0.0, m2_[j] / static_cast<double>(count_));
  stats.count = count_;
  return stats;
}

FeatureStats ComputeStats(std::span<const Spectrogram> specs) {
  StatsAccumulator acc;
  for (const auto &s : specs) acc.Add(s);
  return acc.Finish();
}

Spectrogram NormalizeFeatures(const Spectrogram &spec, const FeatureStats &stats) {
  if (stats.bins() != spec.bins || stats.variance.size() != spec.bins)
    throw ArgumentError("feature normalization: stats have " +
                        std::to_string(stats.bins()) + " bins, spectrogram has " +
                        std::to_string(spec.bins));
  Spectrogram out = spec;
  std::vector<double> inv_std(spec.bins);
  for (size_t j = 0; j < spec.bins; ++j)
    inv_std[j] = 1.0 / std::sqrt(stats.variance[j] + kFeatureVarianceFloor);
  for (size_t t = 0; t < spec.frames; ++t)
    for (size_t j = 0; j < spec.bins; ++j)
      out.at(t, j) = (spec.at(t, j) - stats.mean[j]) * inv_std[j];
  return out;
}

std::vector<uint8_t> SerializeStats(const FeatureStats &stats) {
  if (stats.variance.size() != stats.mean.size())
    throw ArgumentError("feature stats: mean/variance length mismatch");
  ByteWriter w;
  w.U32(static_cast<uint32_t>(stats.bins()));
  for (double m : stats.mean) w.F64(m);
  for (double v : stats.variance) w.F64(v);
  return std::move(w.bytes());
}

FeatureStats DeserializeStats(const std::vector<uint8_t> &bytes) {
  ByteReader in(bytes, "feature stats");
  const uint32_t bins = in.U32();
  if (bins == 0) throw ParseError("feature stats: zero bins");
  FeatureStats stats;
  stats.mean.resize(bins);
  stats.variance.resize(bins);
  for (auto &m : stats.mean) m = in.F64();
  for (auto &v : stats.variance) v = in.F64();
  if (!in.done())
    throw ParseError("feature stats: trailing bytes at offset " + std::to_string(in.offset()));
  stats.count = 1;
  return stats;
}

void SaveStats(const FeatureStats &stats, const std::filesystem::path &path) {
  WriteFileAtomic(path, SerializeStats(stats));
}

FeatureStats LoadStats(const std::filesystem::path &path) {
  return DeserializeStats(ReadFileBytes(path));
}

namespace {
constexpr char kFeatureMagic[] = "SRFEAT01";
}

void SaveSpectrogram(const Spectrogram &spec, const std::filesystem::path &path) {
  ByteWriter w;
  w.Bytes(kFeatureMagic);
  w.U32(static_cast<uint32_t>(spec.frames));
  w.U32(static_cast<uint32_t>(spec.bins));
  w.U32(static_cast<uint32_t>(spec.sample_rate));
  for (double v : spec.data) w.F64(v);
  WriteFileAtomic(path, w.bytes());
}

Spectrogram LoadSpectrogram(const std::filesystem::path &path) {
  const auto bytes = ReadFileBytes(path);
  ByteReader in(bytes, path.string());
  if (in.Bytes(8) != kFeatureMagic)
    throw ParseError(path.string() + ": not a feature file (bad magic at offset 0)");
  Spectrogram spec;
  spec.frames = in.U32();
  spec.bins = in.U32();
  spec.sample_rate = static_cast<int>(in.U32());
  spec.data.resize(spec.frames * spec.bins);
  for (auto &v : spec.data) v = in.F64();
  return spec;
}

}  // namespace speechreg
