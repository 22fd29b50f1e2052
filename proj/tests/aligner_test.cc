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
#include "cagop/aligner.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"

namespace cagop {
namespace {

Posteriorgram FromMatrix(RowMatrix m) {
  Posteriorgram pg;
  pg.probs = std::move(m);
  return pg;
}

TEST(AlignTest, TwoPhoneExample) {
  RowMatrix m(4, 2);
  m << 0.9, 0.1, 0.9, 0.1, 0.1, 0.9, 0.1, 0.9;
  const Alignment al = Align(FromMatrix(m), {0, 1});
  ASSERT_EQ(al.segments.size(), 2u);
  EXPECT_EQ(al.segments[0], (PhoneSegment{0, 0, 2}));
  EXPECT_EQ(al.segments[1], (PhoneSegment{1, 2, 2}));
}

TEST(AlignTest, SinglePhoneCoversEverything) {
  std::mt19937_64 rng(1);
  const Posteriorgram pg = FromMatrix(testing::RandomPosteriors(rng, 7, 3));
  const Alignment al = Align(pg, {2});
  ASSERT_EQ(al.segments.size(), 1u);
  EXPECT_EQ(al.segments[0], (PhoneSegment{2, 0, 7}));
}

TEST(AlignTest, InfeasibleInputs) {
  const Posteriorgram pg = FromMatrix(RowMatrix::Constant(1, 2, 0.5));
  EXPECT_THROW(Align(pg, {0, 1}), DataError);
  AlignConfig cfg;
  cfg.min_segment_frames = 3;
  EXPECT_THROW(Align(FromMatrix(RowMatrix::Constant(5, 2, 0.5)), {0, 1}, cfg), DataError);
  EXPECT_THROW(Align(pg, {}), DataError);
  EXPECT_THROW(Align(pg, {4}), DataError);
  AlignConfig no_sil;
  no_sil.allow_optional_silence = true;
  EXPECT_THROW(Align(pg, {0}, no_sil), UsageError);
}

TEST(AlignTest, TiesGoToEarliestBoundary) {
  const Posteriorgram pg = FromMatrix(RowMatrix::Constant(4, 3, 1.0 / 3.0));
  const Alignment al = Align(pg, {0, 1});
  EXPECT_EQ(al.segments[0], (PhoneSegment{0, 0, 1}));
  EXPECT_EQ(al.segments[1], (PhoneSegment{1, 1, 3}));
  AlignConfig cfg;
  cfg.allow_optional_silence = true;
  cfg.silence_phone = 2;
  // Leading silence loses to the first phone at the same boundary; the last
  // phone still ends as early as possible, leaving the tail to silence.
  const Alignment expected{{{0, 0, 1}, {1, 1, 1}, {2, 2, 2}}};
  EXPECT_EQ(Align(pg, {0, 1}, cfg), expected);
}

TEST(AlignTest, SilenceAbsorbsPauses) {
  RowMatrix m(5, 3);
  m << 0.05, 0.05, 0.9,  //
      0.9, 0.05, 0.05,   //
      0.05, 0.05, 0.9,   //
      0.05, 0.9, 0.05,   //
      0.05, 0.05, 0.9;
  AlignConfig cfg;
  cfg.allow_optional_silence = true;
  cfg.silence_phone = 2;
  const Alignment al = Align(FromMatrix(m), {0, 1}, cfg);
  const Alignment expected{{{2, 0, 1}, {0, 1, 1}, {2, 2, 1}, {1, 3, 1}, {2, 4, 1}}};
  EXPECT_EQ(al, expected);
  cfg.silence_self_loop_penalty = -10.0;
  const Alignment penalized = Align(FromMatrix(m), {0, 1}, cfg);
  EXPECT_EQ(penalized.segments.size(), 2u);
}

TEST(AlignmentLogScoreTest, HandValues) {
  RowMatrix m(2, 2);
  m << 1.0, 0.0, 1.0, 0.0;
  EXPECT_EQ(AlignmentLogScore(FromMatrix(m), {{{0, 0, 2}}}), 0.0);
  RowMatrix half = RowMatrix::Constant(2, 2, 0.5);
  EXPECT_NEAR(AlignmentLogScore(FromMatrix(half), {{{0, 0, 2}}}), -1.386294361119891, 1e-12);
  EXPECT_NEAR(AlignmentLogScore(FromMatrix(m), {{{1, 0, 1}}}), -23.025850929940457, 1e-9);
  EXPECT_THROW(AlignmentLogScore(FromMatrix(m), {{{1, 1, 2}}}), DataError);
}

TEST(AlignPropertyTest, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int num_cols = 2 + trial % 2;
    const int n = 1 + trial % 3;
    const int64_t min_frames = 1 + (trial / 3) % 2;
    const int frames = static_cast<int>(n * min_frames) + static_cast<int>(rng() % 4) +
                       (trial % 5 == 0 ? 0 : 1);
    if (frames > 10) continue;
    const Posteriorgram pg =
        FromMatrix(testing::RandomPosteriors(rng, frames, num_cols, trial % 2 ? 0.3 : 1.0));
    std::vector<PhoneIndex> phones(static_cast<size_t>(n));
    for (auto &p : phones) p = static_cast<PhoneIndex>(rng() % num_cols);

    AlignConfig plain;
    plain.min_segment_frames = min_frames;
    const Alignment al = Align(pg, phones, plain);
    const double oracle = testing::ExhaustiveAlignScore(pg.probs, phones, min_frames, std::nullopt);
    EXPECT_NEAR(AlignmentLogScore(pg, al), oracle, 1e-9);

    AlignConfig with_sil = plain;
    with_sil.allow_optional_silence = true;
    with_sil.silence_phone = static_cast<PhoneIndex>(num_cols - 1);
    const Alignment al_sil = Align(pg, phones, with_sil);
    const double oracle_sil =
        testing::ExhaustiveAlignScore(pg.probs, phones, min_frames, with_sil.silence_phone);
    EXPECT_NEAR(AlignmentLogScore(pg, al_sil), oracle_sil, 1e-9);
    EXPECT_GE(oracle_sil, oracle - 1e-12);

    // Contiguous, full coverage, and the phones come back in order.
    for (const Alignment *a : {&al, &al_sil}) {
      EXPECT_EQ(a->segments.front().start, 0);
      EXPECT_EQ(a->segments.back().end(), frames);
      for (size_t i = 1; i < a->segments.size(); ++i)
        EXPECT_EQ(a->segments[i - 1].end(), a->segments[i].start);
    }
    std::vector<PhoneIndex> spoken;
    for (const auto &s : al.segments) spoken.push_back(s.phone);
    EXPECT_EQ(spoken, phones);
    // Silence segments are marked by state, not label, so recover the
    // phone order by skipping the optional slots.
    size_t next = 0;
    for (const auto &s : al_sil.segments)
      if (next < phones.size() && s.phone == phones[next] && s.length >= min_frames) ++next;
    EXPECT_EQ(next, phones.size());
  }
}

}  // namespace
}  // namespace cagop
