// src/augment.cc

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

#include "speechreg/augment.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "speechreg/internal/resampler.h"

namespace speechreg {

namespace {

constexpr double kSegmentMs = 25.0;
constexpr double kSearchMs = 10.0;
constexpr double kOverlapMs = 5.0;

void CheckRange(const Range &r, const char *name) {
  if (!(r.low <= r.high))
    throw ArgumentError(std::string("augmentation policy: ") + name +
                        " range has low > high");
}

}  // namespace

void AugmentationSpec::Validate() const {
  if (!(tempo_factor > 0.0 && tempo_factor <= 4.0))
    throw ArgumentError("augmentation spec: tempo_factor " +
                        std::to_string(tempo_factor) + " outside (0, 4]");
  if (!(shift_ms >= 0.0))
    throw ArgumentError("augmentation spec: negative shift_ms");
  if (!std::isfinite(pitch_cents) || std::fabs(pitch_cents) > 1200.0)
    throw ArgumentError("augmentation spec: |pitch_cents| must be <= 1200");
  if (!std::isfinite(gain_db))
    throw ArgumentError("augmentation spec: gain_db must be finite");
}

void AugmentationPolicy::Validate() const {
  CheckRange(tempo, "tempo");
  CheckRange(pitch_cents, "pitch");
  CheckRange(gain_db, "gain");
  CheckRange(shift_ms, "shift");
  CheckRange(snr_db, "snr");
  if (enable_tempo && !(tempo.low > 0.0 && tempo.high <= 4.0))
    throw ArgumentError("augmentation policy: tempo range must lie in (0, 4]");
  if (enable_shift && shift_ms.low < 0.0)
    throw ArgumentError("augmentation policy: shift range must be >= 0");
  if (enable_pitch && (pitch_cents.low < -1200.0 || pitch_cents.high > 1200.0))
    throw ArgumentError("augmentation policy: pitch range must lie in [-1200, 1200]");
}

AugmentationPolicy AugmentationPolicy::Disabled() {
  AugmentationPolicy p;
  p.enable_tempo = p.enable_pitch = p.enable_gain = p.enable_shift =
      p.enable_noise = false;
  return p;
}

AugmentationSpec SampleSpec(const AugmentationPolicy &policy, Rng &rng) {
  policy.Validate();
  const double tempo = rng.Uniform(policy.tempo.low, policy.tempo.high);
  const double pitch = rng.Uniform(policy.pitch_cents.low, policy.pitch_cents.high);
  const double gain = rng.Uniform(policy.gain_db.low, policy.gain_db.high);
  const double shift = rng.Uniform(policy.shift_ms.low, policy.shift_ms.high);
  const double snr = rng.Uniform(policy.snr_db.low, policy.snr_db.high);
  AugmentationSpec spec;
  spec.seed = rng.Next();
  if (policy.enable_tempo) spec.tempo_factor = tempo;
  if (policy.enable_pitch) spec.pitch_cents = pitch;
  if (policy.enable_gain) spec.gain_db = gain;
  if (policy.enable_shift) spec.shift_ms = shift;
  if (policy.enable_noise) spec.snr_db = snr;
  return spec;
}

AudioBuffer Tempo(const AudioBuffer &buffer, double factor) {
  if (!(factor > 0.0 && factor <= 4.0))
    throw ArgumentError("Tempo: factor " + std::to_string(factor) + " outside (0, 4]");
  if (factor == 1.0) return buffer;
  const double rate = buffer.sample_rate;
  const size_t seg = static_cast<size_t>(std::lround(kSegmentMs * rate / 1000.0));
  const size_t ovl = static_cast<size_t>(std::lround(kOverlapMs * rate / 1000.0));
  const long search = std::lround(kSearchMs * rate / 1000.0);
  const auto &x = buffer.samples;
  const size_t len = x.size();
  if (len < seg || ovl == 0 || ovl >= seg) return buffer;

  const size_t hop = seg - ovl;
  const size_t target_len =
      static_cast<size_t>(std::llround(static_cast<double>(len) / factor));
  const long max_start = static_cast<long>(len - seg);

  std::vector<double> fade(ovl);
  for (size_t i = 0; i < ovl; ++i)
    fade[i] = 0.5 - 0.5 * std::cos(std::numbers::pi * (i + 0.5) / ovl);

  std::vector<double> out(x.begin(), x.begin() + static_cast<long>(seg));
  out.reserve(target_len + seg);
  long prev_start = 0;
  for (size_t k = 1; out.size() < target_len; ++k) {
    const double nominal = static_cast<double>(k * hop) * factor;
    const long centre = std::lround(nominal);
    const long lo = std::clamp(centre - search / 2, 0L, max_start);
    const long hi = std::clamp(centre + search / 2, 0L, max_start);
    // The output already ends with x[prev_start + hop, prev_start + seg);
    // pick the candidate whose head best matches that tail.
    const double *tail = x.data() + prev_start + static_cast<long>(hop);
    long best = lo;
    double best_score = -std::numeric_limits<double>::infinity();
    for (long s = lo; s <= hi; ++s) {
      const double *cand = x.data() + s;
      double dot = 0.0, energy = 0.0;
      for (size_t i = 0; i < ovl; ++i) {
        dot += tail[i] * cand[i];
        energy += cand[i] * cand[i];
      }
      const double score = dot / std::sqrt(energy + 1e-12);
      if (score > best_score) {
        best_score = score;
        best = s;
      }
    }
    const size_t out_pos = k * hop;
    for (size_t i = 0; i < ovl; ++i)
      out[out_pos + i] = out[out_pos + i] * (1.0 - fade[i]) + x[best + i] * fade[i];
    out.insert(out.end(), x.begin() + best + static_cast<long>(ovl),
               x.begin() + best + static_cast<long>(seg));
    prev_start = best;
  }
  out.resize(target_len);
  return AudioBuffer{std::move(out), buffer.sample_rate};
}

AudioBuffer Pitch(const AudioBuffer &buffer, double cents) {
  if (!(std::fabs(cents) <= 1200.0))
    throw ArgumentError("Pitch: |cents| must be <= 1200");
  if (cents == 0.0) return buffer;
  const double ratio = std::exp2(cents / 1200.0);
  // Resampling to rate / ratio and playing back at the original rate raises
  // the pitch by `ratio` and shortens the signal by the same factor.
  AudioBuffer shifted{internal::ResampleByRatio(buffer.samples, 1.0 / ratio),
                      buffer.sample_rate};
  return Tempo(shifted, 1.0 / ratio);
}

AudioBuffer Gain(const AudioBuffer &buffer, double db) {
  if (db == 0.0) return buffer;
  const double scale = std::pow(10.0, db / 20.0);
  AudioBuffer out = buffer;
  for (auto &s : out.samples) s *= scale;
  return out;
}

AudioBuffer Shift(const AudioBuffer &buffer, double ms) {
  if (!(ms >= 0.0)) throw ArgumentError("Shift: ms must be >= 0");
  const size_t pad = static_cast<size_t>(std::llround(ms * buffer.sample_rate / 1000.0));
  if (pad == 0) return buffer;
  AudioBuffer out;
  out.sample_rate = buffer.sample_rate;
  out.samples.assign(pad, 0.0);
  out.samples.insert(out.samples.end(), buffer.samples.begin(), buffer.samples.end());
  return out;
}

double MeanPower(const AudioBuffer &buffer) {
  if (buffer.samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : buffer.samples) acc += s * s;
  return acc / static_cast<double>(buffer.samples.size());
}

AudioBuffer AddWhiteNoise(const AudioBuffer &buffer, double snr_db, Rng &rng) {
  if (std::isinf(snr_db) && snr_db > 0) return buffer;
  if (std::isnan(snr_db)) throw ArgumentError("AddWhiteNoise: snr_db is NaN");
  const double signal_power = MeanPower(buffer);
  if (!(signal_power > 0.0))
    throw ArgumentError("AddWhiteNoise: SNR undefined for an all-zero signal");
  std::vector<double> noise(buffer.samples.size());
  double noise_power = 0.0;
  for (auto &n : noise) {
    n = rng.Normal();
    noise_power += n * n;
  }
  noise_power /= static_cast<double>(noise.size());
  const double scale =
      std::sqrt(signal_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
  AudioBuffer out = buffer;
  for (size_t i = 0; i < noise.size(); ++i) out.samples[i] += scale * noise[i];
  return out;
}

AudioBuffer ApplyAugmentation(const AudioBuffer &buffer, const AugmentationSpec &spec) {
  spec.Validate();
  AudioBuffer out = Tempo(buffer, spec.tempo_factor);
  out = Pitch(out, spec.pitch_cents);
  out = Gain(out, spec.gain_db);
  out = Shift(out, spec.shift_ms);
  if (spec.snr_db) {
    Rng rng(spec.seed);
    out = AddWhiteNoise(out, *spec.snr_db, rng);
  }
  return out;
}

}  // namespace speechreg
