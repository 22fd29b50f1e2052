// Copyright 2026  The cagop Authors
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
#include "cagop/io.h"

#include <filesystem>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.h"
#include "random_instances.h"

namespace cagop {
namespace {

using testing::RandomLabel;
using testing::RandomPg;
using testing::RandomPhoneSet;

TEST(PhoneSetIoTest, RoundTrip) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const PhoneSet ps = RandomPhoneSet(rng);
    std::stringstream ss;
    WritePhoneSet(ss, ps);
    EXPECT_EQ(ReadPhoneSet(ss), ps);
  }
  std::istringstream dup("A\nA\n");
  EXPECT_THROW(ReadPhoneSet(dup), DataError);
}

TEST(PosteriorgramIoTest, BinaryAndTextRoundTrip) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Posteriorgram pg = RandomPg(rng, 1 + static_cast<int>(rng() % 40),
                                      2 + static_cast<int>(rng() % 9));
    std::stringstream bin, text;
    WritePosteriorgramBinary(bin, pg);
    WritePosteriorgramText(text, pg);
    const Posteriorgram from_bin = ReadPosteriorgramBinary(bin);
    const Posteriorgram from_text = ReadPosteriorgramText(text);
    EXPECT_EQ(from_text.probs, pg.probs);
    EXPECT_EQ(from_text.frame_shift_ms, pg.frame_shift_ms);
    EXPECT_EQ(from_bin.probs, pg.probs.cast<float>().cast<double>());
    EXPECT_EQ(from_bin.frame_shift_ms, pg.frame_shift_ms);
    // The twins agree to 32-bit rounding.
    EXPECT_LE((from_bin.probs - from_text.probs).cwiseAbs().maxCoeff(), 6e-8);
    // A binary file written from the binary reader's output is identical.
    std::stringstream again;
    WritePosteriorgramBinary(again, from_bin);
    std::stringstream first;
    WritePosteriorgramBinary(first, pg);
    EXPECT_EQ(again.str(), first.str());
  }
}

TEST(PosteriorgramIoTest, FilesSniffFormat) {
  std::mt19937_64 rng(3);
  const Posteriorgram pg = RandomPg(rng, 6, 3);
  const auto dir = std::filesystem::temp_directory_path() / "cagop_io_test";
  std::filesystem::create_directories(dir);
  SavePosteriorgram((dir / "a.cagpg").string(), pg, false);
  SavePosteriorgram((dir / "a.txt").string(), pg, true);
  EXPECT_EQ(LoadPosteriorgram((dir / "a.txt").string()).probs, pg.probs);
  EXPECT_EQ(LoadPosteriorgram((dir / "a.cagpg").string()).probs,
            pg.probs.cast<float>().cast<double>());
  EXPECT_THROW(LoadPosteriorgram((dir / "missing").string()), DataError);
  std::filesystem::remove_all(dir);
}

TEST(PosteriorgramIoTest, RejectsCorruptInput) {
  std::mt19937_64 rng(4);
  std::stringstream bin;
  WritePosteriorgramBinary(bin, RandomPg(rng, 4, 3));
  const std::string bytes = bin.str();
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(ReadPosteriorgramBinary(truncated), DataError);
  std::istringstream magic("CAGPG9" + bytes.substr(6));
  EXPECT_THROW(ReadPosteriorgramBinary(magic), DataError);
  std::istringstream short_row("frames=2 phones=2 shift_ms=30\n0.5 0.5\n1\n");
  EXPECT_THROW(ReadPosteriorgramText(short_row), DataError);
  std::istringstream extra_row("frames=1 phones=2 shift_ms=30\n0.5 0.5\n0.5 0.5\n");
  EXPECT_THROW(ReadPosteriorgramText(extra_row), DataError);
  std::istringstream bad_header("frames=1 phones=2\n0.5 0.5\n");
  EXPECT_THROW(ReadPosteriorgramText(bad_header), DataError);
}

TEST(AlignmentIoTest, RoundTrip) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const PhoneSet ps = RandomPhoneSet(rng);
    const AlignmentList list = testing::RandomAlignments(rng, ps);
    std::stringstream ss;
    WriteAlignments(ss, list, ps);
    EXPECT_EQ(ReadAlignments(ss, ps), list);
  }
}

TEST(AlignmentIoTest, ReportsLineNumbers) {
  const PhoneSet ps({"A", "B"});
  std::istringstream overlap("u\tA\t0\t2\nu\tB\t1\t2\n");
  try {
    ReadAlignments(overlap, ps);
    FAIL();
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  std::istringstream unknown("u\tQ\t0\t2\n");
  EXPECT_THROW(ReadAlignments(unknown, ps), DataError);
  std::istringstream split("u\tA\t0\t2\nv\tA\t0\t1\nu\tB\t2\t1\n");
  EXPECT_THROW(ReadAlignments(split, ps), DataError);
}

TEST(AnnotationIoTest, RoundTrip) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const Annotations a = testing::RandomAnnotations(rng, trial);
    std::stringstream ss;
    WriteAnnotations(ss, a);
    EXPECT_EQ(ReadAnnotations(ss), a);
  }
  Annotations numeric_rater;
  numeric_rater.sentence_scores["u"]["7"] = 5.0;
  std::ostringstream sink;
  EXPECT_THROW(WriteAnnotations(sink, numeric_rater), DataError);
  std::istringstream bad_label("u\t0\t2\n");
  EXPECT_THROW(ReadAnnotations(bad_label), DataError);
  std::istringstream bad_score("u\trater\t10.5\n");
  EXPECT_THROW(ReadAnnotations(bad_score), DataError);
}

TEST(LexiconTest, LookupAndOov) {
  const PhoneSet ps({"G", "OW", "SIL"}, 2);
  std::istringstream text("go\tG OW\n");
  const Lexicon lex = ReadLexicon(text, ps);
  EXPECT_EQ(TextToPhones({"GO"}, lex), (std::vector<PhoneIndex>{0, 1}));
  EXPECT_EQ(TextToPhones({"GO", "go"}, lex), (std::vector<PhoneIndex>{0, 1, 0, 1}));
  try {
    TextToPhones({"GO", "XYZZY"}, lex);
    FAIL();
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("XYZZY"), std::string::npos);
  }
  std::istringstream bad("GO\tG QQ\n");
  EXPECT_THROW(ReadLexicon(bad, ps), DataError);
}

TEST(LexiconTest, RoundTrip) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const PhoneSet ps = RandomPhoneSet(rng);
    const Lexicon lex = testing::RandomLexicon(rng, ps);
    std::stringstream ss;
    WriteLexicon(ss, lex, ps);
    EXPECT_EQ(ReadLexicon(ss, ps), lex);
  }
}

TEST(TranscriptIoTest, RoundTrip) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const TranscriptList list = testing::RandomTranscripts(rng);
    std::stringstream ss;
    WriteTranscripts(ss, list);
    EXPECT_EQ(ReadTranscripts(ss), list);
  }
}

TEST(DurationCorpusIoTest, RoundTrip) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const PhoneSet ps = RandomPhoneSet(rng);
    const DurationCorpus corpus = testing::RandomDurationCorpus(rng, ps, trial % 2);
    std::stringstream ss;
    WriteDurationCorpus(ss, corpus, ps);
    EXPECT_TRUE(testing::SameDurationCorpus(ReadDurationCorpus(ss, ps), corpus));
  }
}

TEST(ReportJsonTest, RoundTrip) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const PhoneSet ps = RandomPhoneSet(rng);
    const auto reports = testing::RandomReports(rng, ps);
    EXPECT_EQ(ReportsFromJson(ReportsToJson(reports, ps), ps), reports);
  }
  EXPECT_THROW(ReportsFromJson("{\"a\": 1}", PhoneSet({"A"})), DataError);
  EXPECT_THROW(ReportsFromJson("[{]", PhoneSet({"A"})), DataError);
}

}  // namespace
}  // namespace cagop
