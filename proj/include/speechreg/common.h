// speechreg/common.h

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

#ifndef SPEECHREG_COMMON_H_
#define SPEECHREG_COMMON_H_

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace speechreg {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unsupported or unrecognised encoding (e.g. a WAV codec tag).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated input; the message carries the position.
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A violated precondition on an argument (shape, range, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without leaving log space.
inline double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

/// SplitMix64 finaliser; used for seeding and sub-stream derivation.
inline uint64_t SplitMix64(uint64_t &state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// 64-bit FNV-1a over the bytes of `text`.
inline uint64_t Fnv1a64(std::string_view text) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Derives an independent seed for a named purpose from a command-level seed:
/// SplitMix64(seed XOR FNV-1a(purpose)). Optional integer keys (epoch,
/// utterance index, ...) are folded in with further SplitMix64 rounds, so
/// a stream is identified by (seed, purpose, keys) and never by thread.
inline uint64_t DeriveSeed(uint64_t seed, std::string_view purpose) {
  uint64_t state = seed ^ Fnv1a64(purpose);
  return SplitMix64(state);
}

inline uint64_t DeriveSeed(uint64_t seed, std::string_view purpose,
                           uint64_t key) {
  uint64_t state = DeriveSeed(seed, purpose) ^ (key * 0xD6E8FEB86659FD93ULL);
  return SplitMix64(state);
}

inline uint64_t DeriveSeed(uint64_t seed, std::string_view purpose,
                           uint64_t key1, uint64_t key2) {
  return DeriveSeed(DeriveSeed(seed, purpose, key1), purpose, key2);
}

/// xoshiro256** 1.0 (Blackman & Vigna), state seeded by four SplitMix64
/// outputs. All derived draws (uniform, normal, Bernoulli) are implemented
/// here rather than through <random> distributions, whose algorithms are
/// implementation-defined, so streams are identical on every platform.
class Rng {
 public:
  using result_type = uint64_t;

  explicit Rng(uint64_t seed = 0) { Seed(seed); }

  void Seed(uint64_t seed) {
    uint64_t sm = seed;
    for (auto &s : s_) s = SplitMix64(sm);
    has_spare_normal_ = false;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() { return Next(); }

  uint64_t Next() {
    const uint64_t result = Rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = Rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  /// Uniform in [low, high]; returns `low` when the range is empty.
  double Uniform(double low, double high) {
    return low + (high - low) * Uniform();
  }

  /// Uniform integer in [0, n). Uses rejection to avoid modulo bias.
  uint64_t UniformInt(uint64_t n) {
    if (n == 0) throw ArgumentError("UniformInt: empty range");
    const uint64_t limit = max() - max() % n;
    uint64_t x;
    do {
      x = Next();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via the Box-Muller transform (pairs are cached).
  double Normal() {
    if (has_spare_normal_) {
      has_spare_normal_ = false;
      return spare_normal_;
    }
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_normal_ = radius * std::sin(angle);
    has_spare_normal_ = true;
    return radius * std::cos(angle);
  }

  bool Bernoulli(double p_true) { return Uniform() < p_true; }

 private:
  static uint64_t Rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t s_[4];
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

/// Fisher-Yates shuffle driven by Rng (std::shuffle is not portable).
template <typename Container>
void Shuffle(Container &items, Rng &rng) {
  for (size_t i = items.size(); i > 1; --i) {
    const size_t j = rng.UniformInt(i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace speechreg

#endif  // SPEECHREG_COMMON_H_
