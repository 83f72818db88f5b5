// src/file_util.cc

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

#include "speechreg/file_util.h"

#include <unistd.h>

#include <fstream>
#include <iterator>
#include <system_error>

#include "speechreg/common.h"

namespace speechreg {

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

std::string ReadFileText(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void WriteFileAtomic(const std::filesystem::path &path,
                     std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

void WriteFileAtomic(const std::filesystem::path &path,
                     const std::vector<uint8_t> &contents) {
  WriteFileAtomic(path,
                  std::string_view(reinterpret_cast<const char *>(contents.data()),
                                   contents.size()));
}

void ByteReader::Need(size_t n) const {
  if (n > size_ - offset_)
    throw ParseError(what_ + (what_.empty() ? "" : ": ") +
                     "truncated at byte offset " + std::to_string(offset_) +
                     " (needed " + std::to_string(n) + " bytes, " +
                     std::to_string(size_ - offset_) + " available)");
}

uint64_t ByteReader::Le(int n) {
  Need(static_cast<size_t>(n));
  uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<uint64_t>(data_[offset_ + i]) << (8 * i);
  offset_ += static_cast<size_t>(n);
  return v;
}

std::string ByteReader::Bytes(size_t n) {
  Need(n);
  std::string s(reinterpret_cast<const char *>(data_ + offset_), n);
  offset_ += n;
  return s;
}

void ByteReader::Skip(size_t n) {
  Need(n);
  offset_ += n;
}

}  // namespace speechreg
