// speechreg/file_util.h

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

#ifndef SPEECHREG_FILE_UTIL_H_
#define SPEECHREG_FILE_UTIL_H_

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace speechreg {

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path &path);
std::string ReadFileText(const std::filesystem::path &path);

/// Writes to "<path>.tmp.<pid>" and renames over `path`, so readers never
/// observe a partially written file.
void WriteFileAtomic(const std::filesystem::path &path,
                     std::string_view contents);
void WriteFileAtomic(const std::filesystem::path &path,
                     const std::vector<uint8_t> &contents);

// Little-endian byte packing.
class ByteWriter {
 public:
  void U8(uint8_t v) { bytes_.push_back(v); }
  void U16(uint16_t v) { Le(v, 2); }
  void U32(uint32_t v) { Le(v, 4); }
  void U64(uint64_t v) { Le(v, 8); }
  void I16(int16_t v) { Le(static_cast<uint16_t>(v), 2); }
  void F64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    U64(bits);
  }
  void Bytes(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

  const std::vector<uint8_t> &bytes() const { return bytes_; }
  std::vector<uint8_t> &bytes() { return bytes_; }

 private:
  void Le(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  std::vector<uint8_t> bytes_;
};

/// Little-endian reader that throws ParseError with the byte offset on
/// truncation.
class ByteReader {
 public:
  ByteReader(const uint8_t *data, size_t size, std::string what)
      : data_(data), size_(size), what_(std::move(what)) {}
  explicit ByteReader(const std::vector<uint8_t> &bytes, std::string what = "")
      : ByteReader(bytes.data(), bytes.size(), std::move(what)) {}

  uint8_t U8() { return static_cast<uint8_t>(Le(1)); }
  uint16_t U16() { return static_cast<uint16_t>(Le(2)); }
  uint32_t U32() { return static_cast<uint32_t>(Le(4)); }
  uint64_t U64() { return Le(8); }
  int16_t I16() { return static_cast<int16_t>(U16()); }
  float F32() {
    const uint32_t bits = U32();
    float v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  double F64() {
    const uint64_t bits = U64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::string Bytes(size_t n);
  void Skip(size_t n);

  size_t offset() const { return offset_; }
  size_t remaining() const { return size_ - offset_; }
  bool done() const { return offset_ >= size_; }
  /// Throws unless at least n bytes remain.
  void Need(size_t n) const;

 private:
  uint64_t Le(int n);

  const uint8_t *data_;
  size_t size_;
  size_t offset_ = 0;
  std::string what_;
};

}  // namespace speechreg

#endif  // SPEECHREG_FILE_UTIL_H_
