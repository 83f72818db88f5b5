// tests/manifest_test.cc

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

#include <gtest/gtest.h>

#include "speechreg/common.h"
#include "test_util.h"

namespace speechreg {
namespace {

std::string ErrorOf(const std::string &text, const Alphabet *alphabet = nullptr) {
  try {
    ParseManifest(text, alphabet);
  } catch (const ParseError &e) {
    return e.what();
  }
  return "";
}

TEST(ManifestTest, EmptyFileGivesNoEntries) {
  EXPECT_TRUE(ParseManifest("").empty());
  EXPECT_TRUE(ParseManifest("\n  \n").empty());
}

TEST(ManifestTest, OneLineExactFields) {
  const auto entries =
      ParseManifest(R"({"audio_path": "a/b.wav", "transcript": "abc", "duration_s": 1.25})");
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_EQ(entries[0], (ManifestEntry{"a/b.wav", "abc", 1.25}));
}

TEST(ManifestTest, BlankLinesSkippedOrderKept) {
  const auto entries = ParseManifest(
      "{\"audio_path\":\"1.wav\",\"transcript\":\"a\",\"duration_s\":1}\n\n"
      "{\"audio_path\":\"2.wav\",\"transcript\":\"b\",\"duration_s\":2}\n");
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].audio_path, "1.wav");
  EXPECT_EQ(entries[1].audio_path, "2.wav");
}

TEST(ManifestTest, MissingTranscriptReportsLine) {
  const std::string text =
      "{\"audio_path\":\"1.wav\",\"transcript\":\"a\",\"duration_s\":1}\n\n"
      "{\"audio_path\":\"2.wav\",\"duration_s\":2}\n";
  const std::string msg = ErrorOf(text);
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("transcript"), std::string::npos) << msg;
}

TEST(ManifestTest, MalformedJsonReportsLine) {
  const std::string msg = ErrorOf("{\"audio_path\":\"1.wav\",\"transcript\":\"a\",\"duration_s\":1}\n{oops\n");
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
}

TEST(ManifestTest, InvalidValuesRejected) {
  EXPECT_NE(ErrorOf(R"({"audio_path":"","transcript":"a","duration_s":1})"), "");
  EXPECT_NE(ErrorOf(R"({"audio_path":"x","transcript":"a","duration_s":0})"), "");
  EXPECT_NE(ErrorOf(R"({"audio_path":"x","transcript":3,"duration_s":1})"), "");
  EXPECT_NE(ErrorOf(R"([1, 2])"), "");
}

TEST(ManifestTest, UnknownCharacterNamed) {
  const Alphabet alphabet("abc");
  const std::string msg = ErrorOf(R"({"audio_path":"x","transcript":"abz","duration_s":1})", &alphabet);
  EXPECT_NE(msg.find("'z'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;
}

TEST(ManifestTest, WriteReadRoundTrip) {
  const std::vector<ManifestEntry> entries{{"wav/a.wav", "ab c", 0.5}, {"/abs/b.wav", "", 2.0}};
  testing::TempDir dir;
  WriteManifest(entries, dir / "m.jsonl");
  EXPECT_EQ(ReadManifest(dir / "m.jsonl"), entries);
  EXPECT_EQ(ResolveAudioPath(entries[0], dir.path()), dir.path() / "wav/a.wav");
  EXPECT_EQ(ResolveAudioPath(entries[1], dir.path()), std::filesystem::path("/abs/b.wav"));
}

}  // namespace
}  // namespace speechreg
