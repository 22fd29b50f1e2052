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
#include "cagop/gop.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"

namespace cagop {
namespace {

Posteriorgram FromRows(const std::vector<std::vector<double>> &rows) {
  Posteriorgram pg;
  pg.probs.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows[0].size()));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c)
      pg.probs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return pg;
}

// Reference values below come from a plain scalar evaluation of the same
// formulas, not from this library.
constexpr double kEntropy09 = 0.3250829733914482;
constexpr double kEntropy06 = 0.6730116670092565;
constexpr double kWeight09 = 0.6742964442120065;
constexpr double kTaFixture = -0.23742194311661863;

TEST(GopTest, HandValues) {
  EXPECT_EQ(Gop(FromRows({{1.0, 0.0}, {1.0, 0.0}}), {0, 0, 2}), 0.0);
  EXPECT_NEAR(Gop(FromRows({{0.5, 0.5}, {0.5, 0.5}}), {0, 0, 2}), -0.693147180559945, 1e-12);
  EXPECT_NEAR(Gop(FromRows({{0.25, 0.25, 0.25, 0.25}}), {2, 0, 1}), -1.386294361119891, 1e-12);
  EXPECT_NEAR(Gop(FromRows({{0.0, 1.0}}), {0, 0, 1}), std::log(1e-10), 1e-12);
  EXPECT_THROW(Gop(FromRows({{0.5, 0.5}}), {0, 0, 2}), DataError);
}

TEST(CenterGopTest, UsesMiddleFrame) {
  const Posteriorgram pg = FromRows({{0.1, 0.9}, {0.9, 0.1}, {0.9, 0.1}, {0.3, 0.7}});
  EXPECT_NEAR(CenterGop(pg, {0, 0, 3}), std::log(0.9), 1e-15);
  EXPECT_NEAR(CenterGop(pg, {0, 0, 4}), std::log(0.9), 1e-15);
  EXPECT_NEAR(CenterGop(pg, {1, 3, 1}), Gop(pg, {1, 3, 1}), 0.0);
  // Length 4 from start 0 reads frame 2.
  const Posteriorgram marked = FromRows({{0.5, 0.5}, {0.5, 0.5}, {0.2, 0.8}, {0.5, 0.5}});
  EXPECT_NEAR(CenterGop(marked, {0, 0, 4}), std::log(0.2), 1e-15);
}

TEST(EntropyTest, HandValues) {
  const double one_hot[] = {0.0, 1.0, 0.0};
  EXPECT_EQ(FrameEntropy(one_hot), 0.0);
  const double uniform[] = {0.25, 0.25, 0.25, 0.25};
  EXPECT_NEAR(FrameEntropy(uniform), std::log(4.0), 1e-12);
  const double half[] = {0.5, 0.5};
  EXPECT_NEAR(FrameEntropy(half), std::log(2.0), 1e-12);
  const double bad[] = {0.5, 0.6};
  EXPECT_THROW(FrameEntropy(bad), DataError);
  const double negative[] = {1.5, -0.5};
  EXPECT_THROW(FrameEntropy(negative), DataError);
}

TEST(EntropyTest, BoundedByLogSize) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const int size = 2 + trial % 49;
    const RowMatrix row = testing::RandomPosteriors(rng, 1, size, 0.3 + (trial % 7));
    const double e = FrameEntropy({row.data(), static_cast<size_t>(size)});
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, std::log(static_cast<double>(size)) + 1e-12);
  }
}

TEST(TaScoreTest, TwoFrameFixture) {
  const Posteriorgram pg = FromRows({{0.9, 0.1}, {0.6, 0.4}});
  const auto [score, frames] = TaScore(pg, {0, 0, 2});
  EXPECT_NEAR(frames.entropies[0], kEntropy09, 1e-12);
  EXPECT_NEAR(frames.entropies[1], kEntropy06, 1e-12);
  EXPECT_NEAR(frames.weights[0], kWeight09, 1e-12);
  EXPECT_NEAR(frames.weights[1], 1.0 - kWeight09, 1e-12);
  EXPECT_NEAR(score, kTaFixture, 1e-12);
  // Published approximation of the same fixture, to its stated precision.
  EXPECT_NEAR(score, -0.237448, 1e-4);
}

TEST(TaScoreTest, OneHotFrameDominates) {
  const Posteriorgram pg = FromRows({{1.0, 0.0}, {0.6, 0.4}});
  const auto [score, frames] = TaScore(pg, {0, 0, 2});
  EXPECT_GE(frames.weights[0], 0.9999);
  EXPECT_NEAR(score, 0.0, 1e-6);
}

TEST(TaScoreTest, EqualEntropyReducesToGop) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    // Permuted copies of one row share its entropy but not its posterior.
    RowMatrix base = testing::RandomPosteriors(rng, 1, 4);
    Posteriorgram pg;
    pg.probs.resize(6, 4);
    for (int t = 0; t < 6; ++t) {
      RowMatrix row = base;
      std::shuffle(row.data(), row.data() + 4, rng);
      pg.probs.row(t) = row.row(0);
    }
    const PhoneSegment seg{static_cast<PhoneIndex>(trial % 4), 1, 4};
    EXPECT_NEAR(TaScore(pg, seg).first, Gop(pg, seg), 1e-12);
  }
}

TEST(TaScoreTest, PropertiesOnRandomSegments) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    Posteriorgram pg;
    pg.probs = testing::RandomPosteriors(rng, 12, 5, 0.5);
    const PhoneSegment seg{static_cast<PhoneIndex>(trial % 5), trial % 4, 1 + trial % 8};
    const auto [score, frames] = TaScore(pg, seg);
    double sum = 0.0;
    for (double w : frames.weights) {
      EXPECT_GT(w, 0.0);
      sum += w;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_LE(score, 1e-12);
    EXPECT_LE(Gop(pg, seg), 1e-12);
    EXPECT_LE(CenterGop(pg, seg), 1e-12);

    // Frames outside the segment do not matter.
    Posteriorgram padded;
    padded.probs.resize(pg.num_frames() + 3, 5);
    padded.probs.topRows(pg.num_frames()) = pg.probs;
    padded.probs.bottomRows(3) = testing::RandomPosteriors(rng, 3, 5);
    EXPECT_EQ(TaScore(padded, seg).first, score);
    EXPECT_EQ(Gop(padded, seg), Gop(pg, seg));
    EXPECT_EQ(CenterGop(padded, seg), CenterGop(pg, seg));

    // Raising the posterior of frame t at fixed weights raises its term.
    const size_t t = static_cast<size_t>(trial) % frames.weights.size();
    const double p = std::exp(frames.log_posteriors[t]);
    const double raised = std::min(1.0, p * 1.5 + 1e-3);
    EXPECT_GE(frames.weights[t] * std::log(raised),
              frames.weights[t] * frames.log_posteriors[t]);
  }
}

TEST(EntropyProfileTest, Values) {
  const Posteriorgram hot = FromRows({{1.0, 0.0}, {0.0, 1.0}});
  for (double e : EntropyProfile(hot)) EXPECT_EQ(e, 0.0);
  const Posteriorgram uniform = FromRows({{0.25, 0.25, 0.25, 0.25}, {0.25, 0.25, 0.25, 0.25}});
  for (double e : EntropyProfile(uniform)) EXPECT_NEAR(e, std::log(4.0), 1e-12);
  const auto mixed = EntropyProfile(FromRows({{0.9, 0.1}, {0.6, 0.4}}));
  EXPECT_NEAR(mixed[0], kEntropy09, 1e-12);
  EXPECT_NEAR(mixed[1], kEntropy06, 1e-12);
  std::mt19937_64 rng(3);
  Posteriorgram random;
  random.probs = testing::RandomPosteriors(rng, 50, 6, 0.2);
  for (double e : EntropyProfile(random)) {
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, std::log(6.0));
  }
}

}  // namespace
}  // namespace cagop
