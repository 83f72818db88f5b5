// speechreg/tensor.h

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

#ifndef SPEECHREG_TENSOR_H_
#define SPEECHREG_TENSOR_H_

#include <algorithm>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <new>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "speechreg/common.h"

namespace speechreg {

using Shape = std::vector<size_t>;

inline size_t NumElements(const Shape &shape) {
  return std::accumulate(shape.begin(), shape.end(), size_t{1},
                         std::multiplies<>());
}

std::string ShapeToString(const Shape &shape);

// Allocator with 64-byte alignment so vectorized kernels see the same
// alignment, and hence the same summation order, on every run.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U> &) {}
  T *allocate(size_t n) { return static_cast<T *>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T *p, size_t) { ::operator delete(p, kAlign); }
  template <typename U>
  bool operator==(const AlignedAllocator<U> &) const { return true; }
};

using AlignedVector = std::vector<double, AlignedAllocator<double>>;

/// Dense row-major array of doubles. Activations, weights and gradients are
/// all carried in this type.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0)
      : shape_(std::move(shape)), data_(NumElements(shape_), fill) {}
  Tensor(Shape shape, std::vector<double> data);

  const Shape &shape() const { return shape_; }
  size_t dim(size_t axis) const { return shape_.at(axis); }
  size_t rank() const { return shape_.size(); }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  AlignedVector &vec() { return data_; }
  const AlignedVector &vec() const { return data_; }

  double &operator[](size_t i) { return data_[i]; }
  const double &operator[](size_t i) const { return data_[i]; }

  double &at(size_t i, size_t j) { return data_[i * shape_[1] + j]; }
  const double &at(size_t i, size_t j) const { return data_[i * shape_[1] + j]; }
  double &at(size_t i, size_t j, size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  const double &at(size_t i, size_t j, size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double &at(size_t i, size_t j, size_t k, size_t l) {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }
  const double &at(size_t i, size_t j, size_t k, size_t l) const {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }

  void Fill(double value) { std::fill(data_.begin(), data_.end(), value); }
  /// Changes the shape keeping the data; element counts must agree.
  void Reshape(Shape shape);

  Tensor &operator+=(const Tensor &other);
  Tensor &operator*=(double scale);

  bool operator==(const Tensor &other) const = default;

 private:
  Shape shape_;
  AlignedVector data_;
};

/// Throws ArgumentError unless `t` has exactly `expected` shape.
void CheckShape(const Tensor &t, const Shape &expected, const char *what);

double SquaredNorm(const Tensor &t);
bool AllFinite(const Tensor &t);

}  // namespace speechreg

#endif  // SPEECHREG_TENSOR_H_
