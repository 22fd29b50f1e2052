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

#ifndef CAGOP_DETECTOR_H_
#define CAGOP_DETECTOR_H_

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cagop/core.h"
#include "cagop/duration_factor.h"

namespace cagop {

enum class Variant {
  kGop,            // mean frame log posterior
  kCenterGop,      // center frame only
  kCagop,          // duration-weighted TAScore
  kCagopMinusDur,  // TAScore alone
  kCagopMinusTa,   // duration-weighted GOP
};

std::string_view VariantName(Variant v);
/// Accepts the names returned by VariantName; throws UsageError otherwise.
Variant ParseVariant(std::string_view name);
bool UsesDuration(Variant v);

struct DetectorConfig {
  double beta = 0.1;
  Variant variant = Variant::kCagop;
  // Replace delta by max(delta, 0) before fusing.
  bool clamp_delta_at_zero = false;
};

/// (1 - beta * delta) * score.
double CaGop(double score, double delta, double beta, bool clamp_delta_at_zero = false);

struct ScoringInputs {
  std::string utterance_id;
  const Posteriorgram *posteriorgram = nullptr;
  const PhoneSet *phone_set = nullptr;
  std::vector<PhoneIndex> reference_phones;
  Alignment alignment;
  // One prediction per reference phone. Together with `balance` this is
  // required by the duration variants unless beta is 0.
  std::optional<std::vector<double>> predicted_durations;
  const BalanceTable *balance = nullptr;
};

/// Mean aligned length of the non-silence segments, in frames.
double UtteranceSpeed(const Alignment &alignment, const PhoneSet &phone_set);

/// Per-phone GOP, center GOP, TAScore, delta and CaGOP, with `score` set to
/// the configured variant and the sentence score averaged over it.
ScoreReport ScoreUtterance(const ScoringInputs &inputs, const DetectorConfig &cfg);

double SentenceScore(const ScoreReport &report);

struct ThresholdTable {
  std::map<PhoneIndex, double> per_phone;
  double global = 0.0;

  double For(PhoneIndex phone) const;
  bool operator==(const ThresholdTable &) const = default;
};

struct LabeledScore {
  PhoneIndex phone = 0;
  double score = 0.0;
  bool mispronounced = false;
};

struct CalibrationOptions {
  size_t min_count = 10;
};

/// F1-maximizing threshold for "score < threshold => mispronounced" over the
/// midpoints of consecutive distinct scores, plus the value just above the
/// largest score (every instance flagged). Ties go to the higher threshold.
/// Returns nullopt when no candidate exists or one class is missing.
std::optional<double> BestThreshold(std::vector<std::pair<double, bool>> scored);

/// Per-phone thresholds where a phone has min_count instances of both
/// classes, and a global threshold fitted on everything pooled.
ThresholdTable CalibrateThresholds(const std::vector<LabeledScore> &dev,
                                   const CalibrationOptions &options = {});

/// flag = score < threshold(phone)
std::vector<bool> Detect(const ScoreReport &report, const ThresholdTable &thresholds);
void ApplyDetection(ScoreReport &report, const ThresholdTable &thresholds);

/// `label<TAB>threshold` lines plus one `GLOBAL<TAB>value` line.
void WriteThresholds(std::ostream &os, const ThresholdTable &table, const PhoneSet &phones);
ThresholdTable ReadThresholds(std::istream &is, const PhoneSet &phones);

}  // namespace cagop

#endif  // CAGOP_DETECTOR_H_
