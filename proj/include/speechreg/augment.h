// speechreg/augment.h

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

// Raw-audio perturbations: tempo (WSOLA), pitch, gain, temporal shift and
// white noise at a target SNR, plus the policy that draws one set of
// perturbation parameters per utterance.

#ifndef SPEECHREG_AUGMENT_H_
#define SPEECHREG_AUGMENT_H_

#include <cstdint>
#include <optional>

#include "speechreg/audio_io.h"
#include "speechreg/common.h"

namespace speechreg {

/// One draw of perturbation parameters. Together with the input buffer it
/// fully determines the augmented output.
struct AugmentationSpec {
  double tempo_factor = 1.0;
  double pitch_cents = 0.0;
  double gain_db = 0.0;
  double shift_ms = 0.0;
  std::optional<double> snr_db;  // absent: no noise
  uint64_t seed = 0;             // noise stream

  /// Throws ArgumentError unless tempo_factor in (0, 4] and shift_ms >= 0.
  void Validate() const;
  bool IsIdentity() const {
    return tempo_factor == 1.0 && pitch_cents == 0.0 && gain_db == 0.0 &&
           shift_ms == 0.0 && !snr_db;
  }
  bool operator==(const AugmentationSpec &) const = default;
};

struct Range {
  double low = 0.0;
  double high = 0.0;
  bool operator==(const Range &) const = default;
};

/// Uniform sampling ranges. Defaults are the published ones: tempo
/// U(0.7, 1.3), pitch U(-500, 500) cents, gain U(-20, 10) dB, shift 0-10 ms,
/// SNR 10-15 dB.
struct AugmentationPolicy {
  Range tempo{0.7, 1.3};
  Range pitch_cents{-500.0, 500.0};
  Range gain_db{-20.0, 10.0};
  Range shift_ms{0.0, 10.0};
  Range snr_db{10.0, 15.0};
  bool enable_tempo = true;
  bool enable_pitch = true;
  bool enable_gain = true;
  bool enable_shift = true;
  bool enable_noise = true;

  void Validate() const;
  static AugmentationPolicy Disabled();
  bool operator==(const AugmentationPolicy &) const = default;
};

/// Draws every parameter independently and uniformly from its range.
/// Disabled perturbations get identity values. Six values are always
/// consumed from `rng` so enabling or disabling one perturbation does not
/// shift the others.
AugmentationSpec SampleSpec(const AugmentationPolicy &policy, Rng &rng);

/// WSOLA time stretch: 25 ms segments, 5 ms Hann cross-fade, each segment
/// start searched within a 10 ms window around its nominal position for the
/// best normalized cross-correlation with the natural continuation of the
/// previous segment. Output length is round(len / factor). Buffers shorter
/// than one segment are returned unchanged.
AudioBuffer Tempo(const AudioBuffer &buffer, double factor);

/// Shifts pitch by 2^(cents/1200) keeping the duration: resample to
/// rate / r, reinterpret at the original rate, then time-stretch by 1 / r.
AudioBuffer Pitch(const AudioBuffer &buffer, double cents);

/// Multiplies every sample by 10^(db/20). No clipping.
AudioBuffer Gain(const AudioBuffer &buffer, double db);

/// Prepends round(ms * rate / 1000) zeros.
AudioBuffer Shift(const AudioBuffer &buffer, double ms);

/// Adds Gaussian noise scaled so that the realized SNR (using the mean
/// power of the noise actually drawn) equals snr_db. +inf returns the input.
/// Throws ArgumentError for an all-zero (or empty) input.
AudioBuffer AddWhiteNoise(const AudioBuffer &buffer, double snr_db, Rng &rng);

/// tempo -> pitch -> gain -> shift -> noise; noise drawn from Rng(spec.seed).
AudioBuffer ApplyAugmentation(const AudioBuffer &buffer, const AugmentationSpec &spec);

double MeanPower(const AudioBuffer &buffer);

}  // namespace speechreg

#endif  // SPEECHREG_AUGMENT_H_
