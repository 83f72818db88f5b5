// speechreg/manifest.h

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

// JSON-lines corpus index: one object per line with audio_path, transcript
// and duration_s. Relative audio paths resolve against the manifest's
// directory.

#ifndef SPEECHREG_MANIFEST_H_
#define SPEECHREG_MANIFEST_H_

#include <filesystem>
#include <string>
#include <vector>

#include "speechreg/ctc.h"

namespace speechreg {

struct ManifestEntry {
  std::string audio_path;
  std::string transcript;
  double duration_s = 0.0;
  bool operator==(const ManifestEntry &) const = default;
};

/// Entries in file order; blank lines skipped. Throws ParseError with the
/// 1-based line number on malformed JSON, a missing or mistyped key, an
/// empty path or a non-positive duration. With an alphabet, an unknown
/// transcript character raises ParseError naming the character.
std::vector<ManifestEntry> ParseManifest(const std::string &text,
                                         const Alphabet *alphabet = nullptr);
std::vector<ManifestEntry> ReadManifest(const std::filesystem::path &path,
                                        const Alphabet *alphabet = nullptr);
std::string FormatManifest(const std::vector<ManifestEntry> &entries);
void WriteManifest(const std::vector<ManifestEntry> &entries,
                   const std::filesystem::path &path);

/// audio_path as given if absolute, else relative to `manifest_dir`.
std::filesystem::path ResolveAudioPath(const ManifestEntry &entry,
                                       const std::filesystem::path &manifest_dir);

}  // namespace speechreg

#endif  // SPEECHREG_MANIFEST_H_
