// speechreg/fft.h

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

#ifndef SPEECHREG_FFT_H_
#define SPEECHREG_FFT_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace speechreg {

/// Smallest power of two >= n (n = 0 gives 1).
size_t NextPowerOfTwo(size_t n);

/// In-place iterative radix-2 FFT. data.size() must be a power of two.
void Fft(std::span<std::complex<double>> data, bool inverse = false);

/// |X_k|^2 for k = 0 .. n/2 of a real signal zero-padded to n (a power of
/// two, n >= signal.size()).
std::vector<double> PowerSpectrum(std::span<const double> signal, size_t n);

/// Frequency (Hz) of the strongest non-DC bin of a Hann-windowed FFT of the
/// whole signal, refined by parabolic interpolation on log magnitudes.
double DominantFrequency(std::span<const double> signal, int sample_rate);

}  // namespace speechreg

#endif  // SPEECHREG_FFT_H_
