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
#include "cagop/duration_factor.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "random_instances.h"

namespace cagop {
namespace {

// Records whose speed lands in bucket 4 and whose errors are given.
std::vector<DurationRecord> ErrorsFor(PhoneIndex phone, const std::vector<double> &errors,
                                      double speed = 4.0) {
  std::vector<DurationRecord> out;
  for (double e : errors) out.push_back({{phone}, {5.0 + e}, {5.0}, speed});
  return out;
}

TEST(BalanceTableTest, ConstantErrorsGiveThatError) {
  BalanceFitOptions opts;
  opts.min_count = 1;
  const BalanceTable t = FitBalanceTable(ErrorsFor(0, {0.75, 0.75, 0.75}), opts);
  EXPECT_EQ(t.entries.at({0, 4}), 0.75);
}

TEST(BalanceTableTest, MeanPlusOneAndAHalfStd) {
  BalanceFitOptions opts;
  opts.min_count = 2;
  const BalanceTable t = FitBalanceTable(ErrorsFor(0, {1.0, 3.0}), opts);
  EXPECT_NEAR(t.entries.at({0, 4}), 3.5, 1e-12);
  EXPECT_NEAR(t.phone_backoff.at(0), 3.5, 1e-12);
  EXPECT_NEAR(t.global_backoff, 3.5, 1e-12);
}

TEST(BalanceTableTest, KnownMomentsFixture) {
  // Errors 2 +- 1 in equal numbers: mean 2, population std 1.
  std::vector<double> errors;
  for (int i = 0; i < 20; ++i) errors.push_back(i % 2 ? 1.0 : 3.0);
  const BalanceTable t = FitBalanceTable(ErrorsFor(3, errors, 7.2));
  EXPECT_NEAR(t.entries.at({3, 7}), 3.5, 1e-12);
  // Signs of the raw differences do not matter.
  std::vector<DurationRecord> flipped = ErrorsFor(3, errors, 7.2);
  for (auto &r : flipped) std::swap(r.aligned, r.predicted);
  EXPECT_EQ(FitBalanceTable(flipped), t);
}

TEST(BalanceTableTest, BackOffChain) {
  auto corpus = ErrorsFor(0, {1.0, 1.0, 1.0, 1.0, 1.0}, 4.0);
  const auto sparse = ErrorsFor(0, {3.0, 3.0}, 9.0);
  corpus.insert(corpus.end(), sparse.begin(), sparse.end());
  const auto other = ErrorsFor(1, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, 4.0);
  corpus.insert(corpus.end(), other.begin(), other.end());
  const BalanceTable t = FitBalanceTable(corpus);
  EXPECT_EQ(LookupT(t, 0, 4.0), 1.0);
  // Two observations are below min_count, so bucket 9 uses the phone value.
  EXPECT_FALSE(t.entries.count({0, 9}));
  EXPECT_EQ(LookupT(t, 0, 9.0), t.phone_backoff.at(0));
  EXPECT_EQ(LookupT(t, 0, 15.0), t.phone_backoff.at(0));
  EXPECT_EQ(LookupT(t, 7, 4.0), t.global_backoff);
  EXPECT_EQ(LookupT(t, 1, 4.0), 0.5);
}

TEST(BalanceTableTest, SpeedBuckets) {
  BalanceTable t;
  EXPECT_EQ(t.SpeedBucket(0.3), 2);
  EXPECT_EQ(t.SpeedBucket(4.49), 4);
  EXPECT_EQ(t.SpeedBucket(4.5), 5);
  EXPECT_EQ(t.SpeedBucket(80.0), 20);
  t.bucket_width = 2.0;
  EXPECT_EQ(t.SpeedBucket(9.0), 5);
}

TEST(BalanceTableTest, RejectsBadInput) {
  EXPECT_THROW(FitBalanceTable({}), DataError);
  EXPECT_THROW(FitBalanceTable({{{0, 1}, {1.0}, {1.0, 2.0}, 3.0}}), DataError);
  BalanceFitOptions bad;
  bad.bucket_width = 0.0;
  EXPECT_THROW(FitBalanceTable(ErrorsFor(0, {1.0}), bad), UsageError);
}

using testing::RandomDurationRecords;

TEST(BalanceTablePropertyTest, OrderIndependent) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    auto corpus = RandomDurationRecords(rng, 60);
    const BalanceTable t = FitBalanceTable(corpus);
    std::shuffle(corpus.begin(), corpus.end(), rng);
    EXPECT_EQ(FitBalanceTable(corpus), t);
    for (PhoneIndex p = 0; p < 6; ++p)
      for (double s : {0.0, 3.3, 7.9, 50.0}) EXPECT_TRUE(std::isfinite(LookupT(t, p, s)));
  }
}

TEST(BalanceTablePropertyTest, FewErrorsExceedTolerance) {
  std::mt19937_64 rng(23);
  const auto corpus = RandomDurationRecords(rng, 400);
  const BalanceTable t = FitBalanceTable(corpus);
  size_t total = 0, over = 0;
  for (const auto &rec : corpus)
    for (size_t i = 0; i < rec.phones.size(); ++i) {
      ++total;
      if (std::abs(rec.aligned[i] - rec.predicted[i]) > LookupT(t, rec.phones[i], rec.speed))
        ++over;
    }
  EXPECT_LE(static_cast<double>(over) / static_cast<double>(total), 0.15);
}

TEST(DurationDeltaTest, Values) {
  EXPECT_EQ(DurationDelta(4.0, 4.0, 1.5), -1.5);
  EXPECT_EQ(DurationDelta(10.0, 8.0, 1.5), 0.5);
  EXPECT_EQ(DurationDelta(8.0, 10.0, 1.5), DurationDelta(10.0, 8.0, 1.5));
  for (double x : {0.0, 1.0, 17.25})
    for (double t : {0.0, 0.3, 4.0}) EXPECT_EQ(DurationDelta(x, x, t), -t);
}

TEST(BalanceTableIoTest, RoundTrip) {
  const PhoneSet phones({"A", "B", "C", "D", "SIL"}, 4);
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    BalanceFitOptions opts;
    opts.bucket_width = 0.5 + static_cast<double>(trial % 3) * 0.25;
    opts.min_count = 1 + static_cast<size_t>(trial % 5);
    const BalanceTable t = FitBalanceTable(RandomDurationRecords(rng, 5 + trial % 20), opts);
    std::stringstream ss;
    WriteBalanceTable(ss, t, phones);
    EXPECT_EQ(ReadBalanceTable(ss, phones), t);
  }
}

TEST(BalanceTableIoTest, RejectsMalformedFiles) {
  const PhoneSet phones({"A", "B"});
  auto read = [&](const std::string &text) {
    std::istringstream is(text);
    return ReadBalanceTable(is, phones);
  };
  const std::string header = "# bucket_width=1 bucket_min=2 bucket_max=20\n";
  EXPECT_NO_THROW(read(header + "A\t3\t1.5\n*\tGLOBAL\t2\n"));
  EXPECT_THROW(read(header + "A\t3\t1.5\n"), DataError);
  EXPECT_THROW(read(header + "Q\t3\t1.5\n*\tGLOBAL\t2\n"), DataError);
  EXPECT_THROW(read(header + "A\t30\t1.5\n*\tGLOBAL\t2\n"), DataError);
  EXPECT_THROW(read(header + "A\t3\t-1\n*\tGLOBAL\t2\n"), DataError);
  EXPECT_THROW(read("A\t3\t1.5\n"), DataError);
}

}  // namespace
}  // namespace cagop
