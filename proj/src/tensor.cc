// src/tensor.cc

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

#include "speechreg/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace speechreg {

std::string ShapeToString(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  if (data_.size() != NumElements(shape_))
    throw ArgumentError("Tensor: data length " + std::to_string(data_.size()) +
                        " does not match shape " + ShapeToString(shape_));
}

void Tensor::Reshape(Shape shape) {
  if (NumElements(shape) != data_.size())
    throw ArgumentError("Reshape: cannot view " + ShapeToString(shape_) +
                        " as " + ShapeToString(shape));
  shape_ = std::move(shape);
}

Tensor &Tensor::operator+=(const Tensor &other) {
  if (other.shape_ != shape_)
    throw ArgumentError("Tensor +=: shape " + ShapeToString(other.shape_) +
                        " vs " + ShapeToString(shape_));
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor &Tensor::operator*=(double scale) {
  for (auto &v : data_) v *= scale;
  return *this;
}

void CheckShape(const Tensor &t, const Shape &expected, const char *what) {
  if (t.shape() != expected)
    throw ArgumentError(std::string(what) + ": expected shape " +
                        ShapeToString(expected) + ", got " +
                        ShapeToString(t.shape()));
}

double SquaredNorm(const Tensor &t) {
  double s = 0.0;
  for (double v : t.values()) s += v * v;
  return s;
}

bool AllFinite(const Tensor &t) {
  return std::all_of(t.values().begin(), t.values().end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace speechreg
