// src/manifest.cc

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

#include "speechreg/manifest.h"

#include <json.hpp>
#include <sstream>

#include "speechreg/common.h"
#include "speechreg/file_util.h"

namespace speechreg {

namespace {

bool IsBlank(const std::string &line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

ParseError LineError(size_t line, const std::string &what) {
  return ParseError("manifest line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<ManifestEntry> ParseManifest(const std::string &text, const Alphabet *alphabet) {
  std::vector<ManifestEntry> out;
  std::istringstream in(text);
  std::string line;
  size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (IsBlank(line)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw LineError(number, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw LineError(number, "expected a JSON object");
    ManifestEntry e;
    for (const char *key : {"audio_path", "transcript", "duration_s"})
      if (!j.contains(key)) throw LineError(number, std::string("missing key '") + key + "'");
    if (!j["audio_path"].is_string()) throw LineError(number, "audio_path must be a string");
    if (!j["transcript"].is_string()) throw LineError(number, "transcript must be a string");
    if (!j["duration_s"].is_number()) throw LineError(number, "duration_s must be a number");
    e.audio_path = j["audio_path"].get<std::string>();
    e.transcript = j["transcript"].get<std::string>();
    e.duration_s = j["duration_s"].get<double>();
    if (e.audio_path.empty()) throw LineError(number, "empty audio_path");
    if (!(e.duration_s > 0.0)) throw LineError(number, "duration_s must be positive");
    if (alphabet)
      for (char c : e.transcript)
        if (!alphabet->Contains(c))
          throw LineError(number, std::string("character '") + c +
                                      "' is not in the alphabet");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ManifestEntry> ReadManifest(const std::filesystem::path &path,
                                        const Alphabet *alphabet) {
  try {
    return ParseManifest(ReadFileText(path), alphabet);
  } catch (const ParseError &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string FormatManifest(const std::vector<ManifestEntry> &entries) {
  std::string out;
  for (const auto &e : entries) {
    nlohmann::ordered_json j;
    j["audio_path"] = e.audio_path;
    j["transcript"] = e.transcript;
    j["duration_s"] = e.duration_s;
    out += j.dump() + "\n";
  }
  return out;
}

void WriteManifest(const std::vector<ManifestEntry> &entries,
                   const std::filesystem::path &path) {
  WriteFileAtomic(path, FormatManifest(entries));
}

std::filesystem::path ResolveAudioPath(const ManifestEntry &entry,
                                       const std::filesystem::path &manifest_dir) {
  const std::filesystem::path p(entry.audio_path);
  return p.is_absolute() ? p : manifest_dir / p;
}

}  // namespace speechreg
