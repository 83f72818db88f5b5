// speechreg/audio_io.h

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

#ifndef SPEECHREG_AUDIO_IO_H_
#define SPEECHREG_AUDIO_IO_H_

#include <cstdint>
#include <filesystem>
#include <vector>

namespace speechreg {

/// Mono audio at a fixed sample rate. Samples are nominally in [-1, 1] but
/// intermediate processing may exceed that range; clipping happens only in
/// WriteWav.
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 16000;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  bool operator==(const AudioBuffer &) const = default;
};

/// Reads a RIFF/WAVE file holding 16-bit PCM (format tag 1) or 32-bit IEEE
/// float (format tag 3) samples, one or two channels. Stereo is averaged to
/// mono; 16-bit samples are scaled by 1/32768.
///
/// Throws FormatError for other encodings (the message names the tag) and
/// ParseError with a byte offset for truncated or malformed files.
AudioBuffer ReadWav(const std::filesystem::path &path);
AudioBuffer DecodeWav(const std::vector<uint8_t> &bytes);

/// Writes mono 16-bit PCM. Samples are hard-clipped to [-1, 1] and
/// quantized to round(x * 32768), saturating at 32767.
void WriteWav(const AudioBuffer &buffer, const std::filesystem::path &path);
std::vector<uint8_t> EncodeWav(const AudioBuffer &buffer);

/// Band-limited resampling by windowed-sinc interpolation (Kaiser window,
/// beta = 8, 32 taps at the narrower of the two bandwidths). The filter is
/// tabulated at 512 phases per input sample and linearly interpolated
/// between phases, so arbitrary (irrational) rate ratios are supported.
/// Output length is round(len * target_rate / sample_rate).
AudioBuffer Resample(const AudioBuffer &buffer, double target_rate);

}  // namespace speechreg

#endif  // SPEECHREG_AUDIO_IO_H_
