// src/fft.cc

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

#include "speechreg/fft.h"

#include <cmath>
#include <numbers>

#include "speechreg/common.h"

namespace speechreg {

size_t NextPowerOfTwo(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void Fft(std::span<std::complex<double>> data, bool inverse) {
  const size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw ArgumentError("Fft: size " + std::to_string(n) +
                        " is not a power of two");
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (size_t len = 2; len <= n; len <<= 1) {
    const double angle = sign * 2.0 * std::numbers::pi / len;
    const std::complex<double> step(std::cos(angle), std::sin(angle));
    for (size_t start = 0; start < n; start += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const auto u = data[start + k];
        const auto v = data[start + k + len / 2] * w;
        data[start + k] = u + v;
        data[start + k + len / 2] = u - v;
        w *= step;
      }
    }
  }
  if (inverse)
    for (auto &x : data) x /= static_cast<double>(n);
}

std::vector<double> PowerSpectrum(std::span<const double> signal, size_t n) {
  if (signal.size() > n)
    throw ArgumentError("PowerSpectrum: signal longer than FFT size");
  std::vector<std::complex<double>> buf(n);
  for (size_t i = 0; i < signal.size(); ++i) buf[i] = signal[i];
  Fft(buf);
  std::vector<double> power(n / 2 + 1);
  for (size_t k = 0; k <= n / 2; ++k) power[k] = std::norm(buf[k]);
  return power;
}

double DominantFrequency(std::span<const double> signal, int sample_rate) {
  if (signal.size() < 4) throw ArgumentError("DominantFrequency: too short");
  const size_t n = NextPowerOfTwo(signal.size()) * 4;
  std::vector<double> windowed(signal.size());
  const double denom = static_cast<double>(signal.size() - 1);
  for (size_t i = 0; i < signal.size(); ++i)
    windowed[i] =
        signal[i] * (0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / denom));
  const auto power = PowerSpectrum(windowed, n);
  size_t best = 1;
  for (size_t k = 2; k + 1 < power.size(); ++k)
    if (power[k] > power[best]) best = k;
  double offset = 0.0;
  if (best + 1 < power.size()) {
    const double a = std::log(power[best - 1] + 1e-300);
    const double b = std::log(power[best] + 1e-300);
    const double c = std::log(power[best + 1] + 1e-300);
    const double curvature = a - 2.0 * b + c;
    if (curvature < 0.0) offset = 0.5 * (a - c) / curvature;
  }
  return (static_cast<double>(best) + offset) * sample_rate /
         static_cast<double>(n);
}

}  // namespace speechreg
