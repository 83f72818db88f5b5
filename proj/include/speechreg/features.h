// speechreg/features.h

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

#ifndef SPEECHREG_FEATURES_H_
#define SPEECHREG_FEATURES_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "speechreg/audio_io.h"

namespace speechreg {

inline constexpr double kFrameMs = 20.0;
inline constexpr double kHopMs = 10.0;
inline constexpr double kLogPowerFloor = 1e-10;
inline constexpr double kFeatureVarianceFloor = 1e-8;

/// Log-power spectrogram, frames x bins, row-major.
struct Spectrogram {
  size_t frames = 0;
  size_t bins = 0;
  std::vector<double> data;
  double frame_ms = kFrameMs;
  double hop_ms = kHopMs;
  int sample_rate = 16000;

  double &at(size_t frame, size_t bin) { return data[frame * bins + bin]; }
  double at(size_t frame, size_t bin) const { return data[frame * bins + bin]; }
  std::span<const double> frame(size_t t) const {
    return std::span<const double>(data).subspan(t * bins, bins);
  }
  bool operator==(const Spectrogram &) const = default;
};

struct FramingInfo {
  size_t window = 0;  // samples
  size_t hop = 0;     // samples
  size_t fft_size = 0;
  size_t bins = 0;
};

FramingInfo Framing(int sample_rate);

/// Hamming-windowed 20 ms frames every 10 ms, zero-padded to the next power
/// of two, log(|X|^2 + 1e-10). Throws ArgumentError when the buffer is
/// shorter than one window; the message names the minimum sample count.
Spectrogram ComputeSpectrogram(const AudioBuffer &buffer);

/// Zero mean and unit variance over all entries. A constant spectrogram
/// maps to all zeros.
Spectrogram NormalizeUtterance(const Spectrogram &spec);

/// Per-bin mean and population variance.
struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> variance;
  uint64_t count = 0;  // frames

  size_t bins() const { return mean.size(); }
};

/// Single-pass Welford accumulator with an exact pairwise merge, so partial
/// results from independent workers can be combined.
class StatsAccumulator {
 public:
  void Add(const Spectrogram &spec);
  void AddFrame(std::span<const double> frame);
  void Merge(const StatsAccumulator &other);
  uint64_t count() const { return count_; }
  /// Throws ArgumentError if no frame was added.
  FeatureStats Finish() const;

 private:
  uint64_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

FeatureStats ComputeStats(std::span<const Spectrogram> specs);

/// (x - mean_j) / sqrt(variance_j + 1e-8) per bin j.
Spectrogram NormalizeFeatures(const Spectrogram &spec, const FeatureStats &stats);

/// Little-endian: u32 bins, f64 means[bins], f64 variances[bins]. The frame
/// count is not part of the format; loaded stats report count = 1.
std::vector<uint8_t> SerializeStats(const FeatureStats &stats);
FeatureStats DeserializeStats(const std::vector<uint8_t> &bytes);
void SaveStats(const FeatureStats &stats, const std::filesystem::path &path);
FeatureStats LoadStats(const std::filesystem::path &path);

/// Feature file: magic "SRFEAT01", u32 frames, u32 bins, u32 sample_rate,
/// f64 data (row-major), little-endian.
void SaveSpectrogram(const Spectrogram &spec, const std::filesystem::path &path);
Spectrogram LoadSpectrogram(const std::filesystem::path &path);

}  // namespace speechreg

#endif  // SPEECHREG_FEATURES_H_
