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

#ifndef CAGOP_DURATION_FACTOR_H_
#define CAGOP_DURATION_FACTOR_H_

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cagop/core.h"

namespace cagop {

/// Tolerances T(phone, speed bucket) on the absolute duration prediction
/// error, with per-phone and global back-off values.
struct BalanceTable {
  std::map<std::pair<PhoneIndex, int>, double> entries;
  std::map<PhoneIndex, double> phone_backoff;
  double global_backoff = 0.0;
  double bucket_width = 1.0;  // frames
  int bucket_min = 2;
  int bucket_max = 20;

  /// clamp(round(speed / bucket_width), bucket_min, bucket_max)
  int SpeedBucket(double speed) const;
  bool operator==(const BalanceTable &) const = default;
};

/// One utterance of the fitting corpus: aligned and predicted durations per
/// phone, and the utterance speed (mean aligned phone duration).
struct DurationRecord {
  std::vector<PhoneIndex> phones;
  std::vector<double> aligned;
  std::vector<double> predicted;
  double speed = 0.0;
};

struct BalanceFitOptions {
  double bucket_width = 1.0;
  int bucket_min = 2;
  int bucket_max = 20;
  // Cells with fewer observations fall back to the phone value.
  size_t min_count = 5;
};

/// T = mean + 1.5 * population std of |aligned - predicted| per cell.
/// The result does not depend on record order.
BalanceTable FitBalanceTable(const std::vector<DurationRecord> &corpus,
                             const BalanceFitOptions &options = {});

/// Cell value, else phone back-off, else global back-off.
double LookupT(const BalanceTable &table, PhoneIndex phone, double speed);

/// |aligned - predicted| - tolerance. Negative when the duration is within
/// tolerance.
double DurationDelta(double aligned, double predicted, double tolerance);

/// Text format: a header `# bucket_width=<w> bucket_min=<m> bucket_max=<M>`
/// then `label<TAB>bucket|PHONE<TAB>T` lines and one `*<TAB>GLOBAL<TAB>T`.
void WriteBalanceTable(std::ostream &os, const BalanceTable &table, const PhoneSet &phones);
BalanceTable ReadBalanceTable(std::istream &is, const PhoneSet &phones);

}  // namespace cagop

#endif  // CAGOP_DURATION_FACTOR_H_
