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
// Runs the cagop binary end to end on a small synthetic corpus.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include <gtest/gtest.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("cagop_cli_test_" + std::to_string(getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ASSERT_EQ(Run("synth-corpus --seed 7 --utterances 20 --native-train 40 --native-valid 10 "
                  "--out " + Path("a")), 0);
    ASSERT_EQ(Run("train-dur --train " + Path("a/durations_train.tsv") +
                  " --valid " + Path("a/durations_valid.tsv") + " --phones " + Path("a/phones.txt") +
                  " --epochs 2 --checkpoint " + Path("dur.ckpt")), 0);
    ASSERT_EQ(Run("fit-balance --checkpoint " + Path("dur.ckpt") + " --phones " +
                  Path("a/phones.txt") + " --input " + Path("a/durations_train.tsv") + " --out " +
                  Path("bal.tsv")), 0);
  }

  static std::string Path(const std::string &name) { return (dir_ / name).string(); }

  // Exit status of the binary, stderr discarded.
  static int Run(const std::string &args) {
    const std::string cmd = std::string(CAGOP_BINARY) + " " + args + " 2>/dev/null >/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string Corpus() {
    return "--posteriors " + Path("a/post") + " --phones " + Path("a/phones.txt") +
           " --lexicon " + Path("a/lexicon.txt") + " --text " + Path("a/text.txt");
  }

  static nlohmann::json Json(const std::string &name) {
    std::ifstream is(Path(name));
    return nlohmann::json::parse(is);
  }

  static std::string Slurp(const fs::path &p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
  }

  static fs::path dir_;
};

fs::path CliTest::dir_;

TEST_F(CliTest, SynthCorpusIsByteIdentical) {
  ASSERT_EQ(Run("synth-corpus --seed 7 --utterances 20 --native-train 40 --native-valid 10 "
                "--out " + Path("b")), 0);
  size_t files = 0;
  for (const auto &entry : fs::recursive_directory_iterator(Path("a"))) {
    if (!entry.is_regular_file()) continue;
    const fs::path twin = Path("b") / fs::relative(entry.path(), Path("a"));
    ASSERT_TRUE(fs::exists(twin)) << twin;
    EXPECT_EQ(Slurp(entry.path()), Slurp(twin)) << twin;
    ++files;
  }
  EXPECT_EQ(files, 27u);
}

TEST_F(CliTest, ZeroBetaCollapses) {
  ASSERT_EQ(Run("score " + Corpus() + " --variant cagop --beta 0 --out " + Path("c0.json")), 0);
  ASSERT_EQ(Run("score " + Corpus() + " --variant cagop_minus_dur --out " + Path("dur.json")), 0);
  ASSERT_EQ(Run("score " + Corpus() + " --variant cagop_minus_ta --beta 0 --checkpoint " +
                Path("dur.ckpt") + " --balance " + Path("bal.tsv") + " --out " + Path("ta0.json")),
            0);
  ASSERT_EQ(Run("score " + Corpus() + " --variant gop --out " + Path("gop.json")), 0);
  const auto c0 = Json("c0.json"), dur = Json("dur.json"), ta0 = Json("ta0.json"),
             gop = Json("gop.json");
  ASSERT_EQ(c0.size(), 20u);
  for (size_t u = 0; u < c0.size(); ++u) {
    ASSERT_EQ(c0[u]["phones"].size(), gop[u]["phones"].size());
    for (size_t i = 0; i < c0[u]["phones"].size(); ++i) {
      EXPECT_EQ(c0[u]["phones"][i]["score"].get<double>(),
                dur[u]["phones"][i]["score"].get<double>());
      EXPECT_EQ(ta0[u]["phones"][i]["score"].get<double>(),
                gop[u]["phones"][i]["score"].get<double>());
    }
  }
}

TEST_F(CliTest, PipelineRuns) {
  ASSERT_EQ(Run("align " + Corpus() + " --out " + Path("al.tsv")), 0);
  ASSERT_EQ(Run("score " + Corpus() + " --alignments " + Path("al.tsv") + " --checkpoint " +
                Path("dur.ckpt") + " --balance " + Path("bal.tsv") + " --out " + Path("rep.json")),
            0);
  ASSERT_EQ(Run("calibrate --reports " + Path("rep.json") + " --annotations " +
                Path("a/annotations.tsv") + " --phones " + Path("a/phones.txt") + " --out " +
                Path("th.tsv")), 0);
  ASSERT_EQ(Run("evaluate --reports " + Path("rep.json") + " --annotations " +
                Path("a/annotations.tsv") + " --phones " + Path("a/phones.txt") +
                " --thresholds " + Path("th.tsv") + " --out " + Path("ev.tsv") + " --json " +
                Path("ev.json")), 0);
  const auto ev = Json("ev.json");
  EXPECT_EQ(ev["phones"].get<double>(),
            ev["tp"].get<double>() + ev["fp"].get<double>() + ev["fn"].get<double>() +
                ev["tn"].get<double>());
  EXPECT_GE(ev["f1"].get<double>(), 0.0);
  EXPECT_TRUE(ev.contains("pcc"));

  ASSERT_EQ(Run("entropy-dump --posteriors " + Path("a/post/utt0000.cagpg") + " --phones " +
                Path("a/phones.txt") + " --out " + Path("ent.csv")), 0);
  std::ifstream is(Path("ent.csv"));
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "frame,entropy");
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(Run(""), 1);
  EXPECT_EQ(Run("frobnicate"), 1);
  EXPECT_EQ(Run("score --phones " + Path("a/phones.txt")), 1);
  EXPECT_EQ(Run("score " + Corpus() + " --beta -1"), 1);
  EXPECT_EQ(Run("score " + Corpus() + " --checkpoint " + Path("dur.ckpt")), 1);
  // Missing and malformed inputs.
  EXPECT_EQ(Run("entropy-dump --posteriors " + Path("nope.cagpg") + " --phones " +
                Path("a/phones.txt")), 2);
  EXPECT_EQ(Run("entropy-dump --posteriors " + Path("a/phones.txt") + " --phones " +
                Path("a/phones.txt")), 2);
  EXPECT_EQ(Run("calibrate --reports " + Path("a/phones.txt") + " --annotations " +
                Path("a/annotations.tsv") + " --phones " + Path("a/phones.txt")), 2);
  // A phone set that does not match the checkpoint.
  {
    std::ofstream os(Path("small_phones.txt"));
    os << "A\nB\n";
  }
  EXPECT_EQ(Run("predict-dur --checkpoint " + Path("dur.ckpt") + " --phones " +
                Path("small_phones.txt") + " --input " + Path("a/durations_valid.tsv")), 2);
}

}  // namespace
