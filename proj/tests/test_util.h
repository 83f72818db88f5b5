// tests/test_util.h

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

#ifndef SPEECHREG_TESTS_TEST_UTIL_H_
#define SPEECHREG_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>

#include "speechreg/audio_io.h"
#include "speechreg/common.h"
#include "speechreg/ctc.h"

namespace speechreg::testing {

inline AudioBuffer MakeSine(double freq, double seconds, int rate = 16000,
                            double amplitude = 0.5) {
  AudioBuffer b;
  b.sample_rate = rate;
  const size_t n = static_cast<size_t>(std::lround(seconds * rate));
  b.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    b.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq * i / rate);
  return b;
}

inline double Rms(const std::vector<double> &v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc / static_cast<double>(v.size()));
}

/// |a - n| / max(|a|, |n|, floor). The floor keeps entries whose true value
/// is near zero from dominating through finite-difference noise.
inline double RelativeError(double analytic, double numeric, double floor = 1e-4) {
  const double denom = std::max({std::fabs(analytic), std::fabs(numeric), floor});
  return std::fabs(analytic - numeric) / denom;
}

/// Largest RelativeError over corresponding entries.
inline double MaxRelativeError(const Tensor &analytic, const Tensor &numeric,
                               double floor = 1e-4) {
  double worst = 0.0;
  for (size_t i = 0; i < analytic.size(); ++i)
    worst = std::max(worst, RelativeError(analytic[i], numeric[i], floor));
  return worst;
}

/// Central differences of a scalar function with respect to every entry of
/// `x`; `x` is restored afterwards.
template <typename Fn>
Tensor NumericGradient(Fn &&f, Tensor &x, double h = 1e-5) {
  Tensor g(x.shape());
  for (size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f();
    x[i] = keep - h;
    const double down = f();
    x[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

inline Tensor RandomTensor(const Shape &shape, Rng &rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  for (auto &v : t.vec()) v = rng.Uniform(lo, hi);
  return t;
}

/// sum_i r_i * y_i: a scalar probe whose gradient with respect to y is r.
inline double Dot(const Tensor &r, const Tensor &y) {
  double s = 0.0;
  for (size_t i = 0; i < y.size(); ++i) s += r[i] * y[i];
  return s;
}

/// Softmax of N(0, scale^2) logits, one row per frame.
inline LogProbLattice RandomLattice(size_t frames, size_t classes, Rng &rng,
                                    double scale = 1.5) {
  Tensor logits({frames, classes});
  for (auto &v : logits.vec()) v = scale * rng.Normal();
  return LogSoftmax(logits);
}

/// Lattice from explicit probability rows.
inline LogProbLattice LatticeFromProbs(const std::vector<std::vector<double>> &rows) {
  Tensor t({rows.size(), rows.front().size()});
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t k = 0; k < rows[i].size(); ++k) t.at(i, k) = std::log(rows[i][k]);
  return LogProbLattice(std::move(t));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string &tag = "speechreg") {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace speechreg::testing

#endif  // SPEECHREG_TESTS_TEST_UTIL_H_
