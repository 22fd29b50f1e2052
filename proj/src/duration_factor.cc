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
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "cagop/text_util.h"

namespace cagop {
namespace {

// Sorting first makes the sums independent of corpus order.
double Tolerance(std::vector<double> errors) {
  std::sort(errors.begin(), errors.end());
  const double n = static_cast<double>(errors.size());
  double sum = 0.0;
  for (double e : errors) sum += e;
  const double mean = sum / n;
  double sq = 0.0;
  for (double e : errors) sq += (e - mean) * (e - mean);
  return mean + 1.5 * std::sqrt(sq / n);
}

}  // namespace

int BalanceTable::SpeedBucket(double speed) const {
  const double raw = std::round(speed / bucket_width);
  if (!std::isfinite(raw)) return bucket_min;
  return static_cast<int>(std::clamp(raw, static_cast<double>(bucket_min),
                                     static_cast<double>(bucket_max)));
}

BalanceTable FitBalanceTable(const std::vector<DurationRecord> &corpus,
                             const BalanceFitOptions &options) {
  if (corpus.empty()) throw DataError("balance table corpus is empty");
  if (!(options.bucket_width > 0.0) || options.bucket_min > options.bucket_max)
    throw UsageError("invalid speed bucket configuration");
  BalanceTable table;
  table.bucket_width = options.bucket_width;
  table.bucket_min = options.bucket_min;
  table.bucket_max = options.bucket_max;

  std::map<std::pair<PhoneIndex, int>, std::vector<double>> cells;
  std::map<PhoneIndex, std::vector<double>> per_phone;
  std::vector<double> all;
  for (size_t r = 0; r < corpus.size(); ++r) {
    const DurationRecord &rec = corpus[r];
    if (rec.aligned.size() != rec.phones.size() || rec.predicted.size() != rec.phones.size())
      throw DataError("duration record " + std::to_string(r) + " has mismatched lengths");
    const int bucket = table.SpeedBucket(rec.speed);
    for (size_t i = 0; i < rec.phones.size(); ++i) {
      const double err = std::abs(rec.aligned[i] - rec.predicted[i]);
      if (!std::isfinite(err)) throw DataError("non-finite duration in record " + std::to_string(r));
      cells[{rec.phones[i], bucket}].push_back(err);
      per_phone[rec.phones[i]].push_back(err);
      all.push_back(err);
    }
  }
  if (all.empty()) throw DataError("balance table corpus has no phones");
  for (auto &[key, errors] : cells)
    if (errors.size() >= options.min_count) table.entries[key] = Tolerance(std::move(errors));
  for (auto &[phone, errors] : per_phone) table.phone_backoff[phone] = Tolerance(std::move(errors));
  table.global_backoff = Tolerance(std::move(all));
  return table;
}

double LookupT(const BalanceTable &table, PhoneIndex phone, double speed) {
  if (auto it = table.entries.find({phone, table.SpeedBucket(speed)}); it != table.entries.end())
    return it->second;
  if (auto it = table.phone_backoff.find(phone); it != table.phone_backoff.end())
    return it->second;
  return table.global_backoff;
}

double DurationDelta(double aligned, double predicted, double tolerance) {
  return std::abs(aligned - predicted) - tolerance;
}

void WriteBalanceTable(std::ostream &os, const BalanceTable &table, const PhoneSet &phones) {
  os << "# bucket_width=" << FormatDouble(table.bucket_width) << " bucket_min=" << table.bucket_min
     << " bucket_max=" << table.bucket_max << '\n';
  for (const auto &[key, t] : table.entries)
    os << phones.label(key.first) << '\t' << key.second << '\t' << FormatDouble(t) << '\n';
  for (const auto &[phone, t] : table.phone_backoff)
    os << phones.label(phone) << "\tPHONE\t" << FormatDouble(t) << '\n';
  os << "*\tGLOBAL\t" << FormatDouble(table.global_backoff) << '\n';
}

BalanceTable ReadBalanceTable(std::istream &is, const PhoneSet &phones) {
  BalanceTable table;
  bool have_header = false, have_global = false;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    if (!have_header) {
      const auto fields = SplitWhitespace(line);
      if (fields.size() != 4 || fields[0] != "#") throw LineError(line_no, "expected balance header");
      for (size_t i = 1; i < 4; ++i) {
        const auto [key, value] = SplitKeyValue(fields[i], line_no);
        if (key == "bucket_width") table.bucket_width = ParseDouble(value, line_no);
        else if (key == "bucket_min") table.bucket_min = static_cast<int>(ParseInt(value, line_no));
        else if (key == "bucket_max") table.bucket_max = static_cast<int>(ParseInt(value, line_no));
        else throw LineError(line_no, "unknown header key '" + std::string(key) + "'");
      }
      if (!(table.bucket_width > 0.0) || table.bucket_min > table.bucket_max)
        throw LineError(line_no, "invalid bucket configuration");
      have_header = true;
      continue;
    }
    const auto fields = SplitTabs(line);
    if (fields.size() != 3) throw LineError(line_no, "expected 3 tab-separated fields");
    const double t = ParseDouble(fields[2], line_no);
    if (!(t >= 0.0) || !std::isfinite(t)) throw LineError(line_no, "tolerance must be >= 0");
    if (fields[1] == "GLOBAL") {
      table.global_backoff = t;
      have_global = true;
      continue;
    }
    const auto phone = phones.find(fields[0]);
    if (!phone) throw LineError(line_no, "unknown phone '" + std::string(fields[0]) + "'");
    if (fields[1] == "PHONE") {
      table.phone_backoff[*phone] = t;
    } else {
      const int bucket = static_cast<int>(ParseInt(fields[1], line_no));
      if (bucket < table.bucket_min || bucket > table.bucket_max)
        throw LineError(line_no, "bucket outside header range");
      table.entries[{*phone, bucket}] = t;
    }
  }
  if (!have_header) throw DataError("balance table is empty");
  if (!have_global) throw DataError("balance table lacks a GLOBAL line");
  return table;
}

}  // namespace cagop
