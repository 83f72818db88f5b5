// src/audio_io.cc

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

#include "speechreg/audio_io.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "speechreg/common.h"
#include "speechreg/file_util.h"
#include "speechreg/internal/resampler.h"

namespace speechreg {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;

struct WavFormat {
  uint16_t tag = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits = 0;
};

std::string TagName(uint16_t tag) {
  std::ostringstream os;
  os << "0x" << std::hex << tag;
  switch (tag) {
    case 2: os << " (ADPCM)"; break;
    case 6: os << " (A-law)"; break;
    case 7: os << " (mu-law)"; break;
    case 0xFFFE: os << " (WAVE_FORMAT_EXTENSIBLE)"; break;
    default: break;
  }
  return os.str();
}

}  // namespace

AudioBuffer DecodeWav(const std::vector<uint8_t> &bytes) {
  ByteReader in(bytes, "wav");
  if (in.Bytes(4) != "RIFF") throw ParseError("wav: missing RIFF tag at byte offset 0");
  in.U32();  // RIFF size; not trusted.
  if (in.Bytes(4) != "WAVE") throw ParseError("wav: missing WAVE tag at byte offset 8");

  WavFormat fmt;
  bool have_fmt = false;
  while (!in.done()) {
    const size_t chunk_offset = in.offset();
    const std::string id = in.Bytes(4);
    const uint32_t size = in.U32();
    if (id == "fmt ") {
      if (size < 16)
        throw ParseError("wav: fmt chunk too small at byte offset " +
                         std::to_string(chunk_offset));
      in.Need(size);
      fmt.tag = in.U16();
      fmt.channels = in.U16();
      fmt.sample_rate = in.U32();
      in.U32();  // byte rate
      in.U16();  // block align
      fmt.bits = in.U16();
      in.Skip(size - 16);
      have_fmt = true;
      if (fmt.tag != kFormatPcm && fmt.tag != kFormatFloat)
        throw FormatError("wav: unsupported codec tag " + TagName(fmt.tag));
      if (fmt.tag == kFormatPcm && fmt.bits != 16)
        throw FormatError("wav: unsupported PCM bit depth " + std::to_string(fmt.bits) +
                          " (codec tag " + TagName(fmt.tag) + ")");
      if (fmt.tag == kFormatFloat && fmt.bits != 32)
        throw FormatError("wav: unsupported float bit depth " + std::to_string(fmt.bits) +
                          " (codec tag " + TagName(fmt.tag) + ")");
      if (fmt.channels != 1 && fmt.channels != 2)
        throw FormatError("wav: unsupported channel count " + std::to_string(fmt.channels));
      if (fmt.sample_rate == 0)
        throw ParseError("wav: zero sample rate at byte offset " + std::to_string(chunk_offset + 12));
    } else if (id == "data") {
      if (!have_fmt)
        throw ParseError("wav: data chunk before fmt chunk at byte offset " +
                         std::to_string(chunk_offset));
      in.Need(size);
      const size_t frame_bytes = static_cast<size_t>(fmt.channels) * (fmt.bits / 8);
      const size_t frames = size / frame_bytes;
      AudioBuffer out;
      out.sample_rate = static_cast<int>(fmt.sample_rate);
      out.samples.resize(frames);
      for (size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (int c = 0; c < fmt.channels; ++c)
          acc += fmt.tag == kFormatPcm ? in.I16() / 32768.0 : static_cast<double>(in.F32());
        out.samples[i] = acc / fmt.channels;
      }
      return out;
    } else {
      in.Skip(size);
    }
    if (size % 2 == 1 && !in.done()) in.Skip(1);
  }
  if (!have_fmt) throw ParseError("wav: no fmt chunk before byte offset " + std::to_string(in.offset()));
  throw ParseError("wav: no data chunk before byte offset " + std::to_string(in.offset()));
}

AudioBuffer ReadWav(const std::filesystem::path &path) {
  try {
    return DecodeWav(ReadFileBytes(path));
  } catch (const FormatError &e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const ParseError &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<uint8_t> EncodeWav(const AudioBuffer &buffer) {
  if (buffer.samples.empty()) throw ArgumentError("WriteWav: empty buffer");
  if (buffer.sample_rate <= 0) throw ArgumentError("WriteWav: sample rate must be positive");
  const uint32_t data_bytes = static_cast<uint32_t>(buffer.samples.size() * 2);
  ByteWriter w;
  w.Bytes("RIFF");
  w.U32(36 + data_bytes);
  w.Bytes("WAVE");
  w.Bytes("fmt ");
  w.U32(16);
  w.U16(kFormatPcm);
  w.U16(1);
  w.U32(static_cast<uint32_t>(buffer.sample_rate));
  w.U32(static_cast<uint32_t>(buffer.sample_rate) * 2);
  w.U16(2);
  w.U16(16);
  w.Bytes("data");
  w.U32(data_bytes);
  for (double x : buffer.samples) {
    const double clipped = std::clamp(x, -1.0, 1.0);
    const long q = std::lround(clipped * 32768.0);
    w.I16(static_cast<int16_t>(std::clamp(q, -32768L, 32767L)));
  }
  return std::move(w.bytes());
}

void WriteWav(const AudioBuffer &buffer, const std::filesystem::path &path) {
  WriteFileAtomic(path, EncodeWav(buffer));
}

namespace internal {

namespace {

constexpr int kHalfZeroCrossings = 16;  // 32 taps at the filter bandwidth
constexpr int kPhases = 512;
constexpr double kKaiserBeta = 8.0;
constexpr double kRolloff = 0.95;

// Kaiser-windowed sinc sampled on [0, kHalfZeroCrossings] at kPhases points
// per zero crossing.
const std::vector<double> &FilterTable() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kHalfZeroCrossings * kPhases + 2, 0.0);
    const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
    for (int j = 0; j <= kHalfZeroCrossings * kPhases; ++j) {
      const double u = static_cast<double>(j) / kPhases;
      const double sinc =
          j == 0 ? 1.0 : std::sin(std::numbers::pi * u) / (std::numbers::pi * u);
      const double r = u / kHalfZeroCrossings;
      const double window =
          std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / norm;
      t[j] = sinc * window;
    }
    return t;
  }();
  return table;
}

inline double Kernel(const std::vector<double> &table, double u) {
  u = std::fabs(u) * kPhases;
  const size_t idx = static_cast<size_t>(u);
  if (idx >= static_cast<size_t>(kHalfZeroCrossings * kPhases)) return 0.0;
  const double frac = u - static_cast<double>(idx);
  return table[idx] + frac * (table[idx + 1] - table[idx]);
}

}  // namespace

std::vector<double> ResampleByRatio(const std::vector<double> &input, double ratio) {
  if (!(ratio > 0.0)) throw ArgumentError("Resample: ratio must be positive");
  const size_t out_len =
      static_cast<size_t>(std::llround(static_cast<double>(input.size()) * ratio));
  std::vector<double> out(out_len, 0.0);
  if (input.empty()) return out;
  const auto &table = FilterTable();
  // Cutoff relative to the input Nyquist frequency.
  const double scale = std::min(1.0, ratio) * kRolloff;
  const double reach = kHalfZeroCrossings / scale;
  const long last = static_cast<long>(input.size()) - 1;
  for (size_t n = 0; n < out_len; ++n) {
    const double t = static_cast<double>(n) / ratio;
    const long lo = std::max(0L, static_cast<long>(std::ceil(t - reach)));
    const long hi = std::min(last, static_cast<long>(std::floor(t + reach)));
    double acc = 0.0;
    for (long i = lo; i <= hi; ++i)
      acc += input[static_cast<size_t>(i)] * Kernel(table, scale * (t - static_cast<double>(i)));
    out[n] = scale * acc;
  }
  return out;
}

}  // namespace internal

AudioBuffer Resample(const AudioBuffer &buffer, double target_rate) {
  if (!(target_rate > 0.0)) throw ArgumentError("Resample: target rate must be positive");
  if (buffer.sample_rate <= 0) throw ArgumentError("Resample: source rate must be positive");
  if (target_rate == static_cast<double>(buffer.sample_rate)) return buffer;
  AudioBuffer out;
  out.sample_rate = static_cast<int>(std::lround(target_rate));
  out.samples = internal::ResampleByRatio(buffer.samples, target_rate / buffer.sample_rate);
  return out;
}

}  // namespace speechreg
