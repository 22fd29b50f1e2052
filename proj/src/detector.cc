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

#include "cagop/detector.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "cagop/gop.h"
#include "cagop/text_util.h"

namespace cagop {
namespace {

constexpr std::pair<Variant, std::string_view> kVariantNames[] = {
    {Variant::kGop, "gop"},
    {Variant::kCenterGop, "center_gop"},
    {Variant::kCagop, "cagop"},
    {Variant::kCagopMinusDur, "cagop_minus_dur"},
    {Variant::kCagopMinusTa, "cagop_minus_ta"},
};

// a/b > c/d for non-negative integers with positive denominators.
bool FractionGreater(int64_t a, int64_t b, int64_t c, int64_t d) { return a * d > c * b; }

}  // namespace

std::string_view VariantName(Variant v) {
  for (const auto &[variant, name] : kVariantNames)
    if (variant == v) return name;
  return "unknown";
}

Variant ParseVariant(std::string_view name) {
  for (const auto &[variant, known] : kVariantNames)
    if (known == name) return variant;
  throw UsageError("unknown variant '" + std::string(name) +
                   "' (expected gop, center_gop, cagop, cagop_minus_dur, cagop_minus_ta)");
}

bool UsesDuration(Variant v) { return v == Variant::kCagop || v == Variant::kCagopMinusTa; }

double CaGop(double score, double delta, double beta, bool clamp_delta_at_zero) {
  if (clamp_delta_at_zero) delta = std::max(delta, 0.0);
  return (1.0 - beta * delta) * score;
}

double UtteranceSpeed(const Alignment &alignment, const PhoneSet &phone_set) {
  const auto speech = SpeechSegments(alignment, phone_set);
  if (speech.empty()) throw DataError("alignment has no speech segments");
  double total = 0.0;
  for (const auto &s : speech) total += static_cast<double>(s.length);
  return total / static_cast<double>(speech.size());
}

ScoreReport ScoreUtterance(const ScoringInputs &in, const DetectorConfig &cfg) {
  if (!in.posteriorgram || !in.phone_set) throw UsageError("scoring inputs are incomplete");
  if (!(cfg.beta >= 0.0)) throw UsageError("beta must be >= 0");
  const Posteriorgram &pg = *in.posteriorgram;
  CheckAlignment(in.alignment, *in.phone_set, in.reference_phones, pg.num_frames());
  const auto speech = SpeechSegments(in.alignment, *in.phone_set);
  if (speech.empty()) throw DataError("utterance '" + in.utterance_id + "' has no phones to score");

  const bool have_duration = in.predicted_durations.has_value() && in.balance != nullptr;
  if (UsesDuration(cfg.variant) && cfg.beta != 0.0 && !have_duration)
    throw UsageError("variant " + std::string(VariantName(cfg.variant)) +
                     " needs duration predictions and a balance table");
  if (in.predicted_durations && in.predicted_durations->size() != speech.size())
    throw DataError("utterance '" + in.utterance_id + "' has " +
                    std::to_string(in.predicted_durations->size()) +
                    " duration predictions for " + std::to_string(speech.size()) + " phones");
  const double speed = UtteranceSpeed(in.alignment, *in.phone_set);

  ScoreReport report;
  report.utterance_id = in.utterance_id;
  report.variant = VariantName(cfg.variant);
  report.per_phone.reserve(speech.size());
  for (size_t i = 0; i < speech.size(); ++i) {
    const PhoneSegment &seg = speech[i];
    PhoneScore ps;
    ps.phone = seg.phone;
    ps.segment = seg;
    ps.gop = Gop(pg, seg);
    ps.center_gop = CenterGop(pg, seg);
    ps.tascore = TaScore(pg, seg).first;
    double delta = 0.0;
    if (have_duration) {
      const double tolerance = LookupT(*in.balance, seg.phone, speed);
      delta = DurationDelta(static_cast<double>(seg.length), (*in.predicted_durations)[i], tolerance);
      ps.delta = delta;
      ps.cagop = CaGop(ps.tascore, delta, cfg.beta, cfg.clamp_delta_at_zero);
    }
    switch (cfg.variant) {
      case Variant::kGop: ps.score = ps.gop; break;
      case Variant::kCenterGop: ps.score = ps.center_gop; break;
      case Variant::kCagopMinusDur: ps.score = ps.tascore; break;
      case Variant::kCagop:
        ps.score = CaGop(ps.tascore, delta, cfg.beta, cfg.clamp_delta_at_zero);
        break;
      case Variant::kCagopMinusTa:
        ps.score = CaGop(ps.gop, delta, cfg.beta, cfg.clamp_delta_at_zero);
        break;
    }
    report.per_phone.push_back(ps);
  }
  report.sentence_score = SentenceScore(report);
  return report;
}

double SentenceScore(const ScoreReport &report) {
  if (report.per_phone.empty()) throw DataError("sentence score of an empty report");
  double sum = 0.0;
  for (const auto &p : report.per_phone) sum += p.score;
  return sum / static_cast<double>(report.per_phone.size());
}

double ThresholdTable::For(PhoneIndex phone) const {
  auto it = per_phone.find(phone);
  return it == per_phone.end() ? global : it->second;
}

std::optional<double> BestThreshold(std::vector<std::pair<double, bool>> scored) {
  if (scored.empty()) return std::nullopt;
  std::sort(scored.begin(), scored.end());
  int64_t positives = 0;
  for (const auto &s : scored) positives += s.second ? 1 : 0;
  if (positives == 0 || positives == static_cast<int64_t>(scored.size())) return std::nullopt;

  std::optional<double> best;
  int64_t best_num = 0, best_den = 1;
  auto consider = [&](double threshold, int64_t tp, int64_t flagged) {
    const int64_t fp = flagged - tp;
    const int64_t fn = positives - tp;
    const int64_t num = 2 * tp, den = 2 * tp + fp + fn;
    // Ascending sweep, so >= keeps the highest threshold among ties.
    if (!best || !FractionGreater(best_num, best_den, num, den)) {
      best = threshold;
      best_num = num;
      best_den = den;
    }
  };
  int64_t tp = 0;
  for (size_t i = 0; i < scored.size(); ++i) {
    tp += scored[i].second ? 1 : 0;
    if (i + 1 < scored.size()) {
      const double lo = scored[i].first, hi = scored[i + 1].first;
      if (lo == hi) continue;
      double mid = lo + (hi - lo) / 2.0;
      if (!(lo < mid)) mid = hi;
      consider(mid, tp, static_cast<int64_t>(i + 1));
    }
  }
  consider(std::nextafter(scored.back().first, std::numeric_limits<double>::infinity()), tp,
           static_cast<int64_t>(scored.size()));
  return best;
}

ThresholdTable CalibrateThresholds(const std::vector<LabeledScore> &dev,
                                   const CalibrationOptions &options) {
  if (dev.empty()) throw DataError("calibration set is empty");
  std::vector<std::pair<double, bool>> pooled;
  std::map<PhoneIndex, std::vector<std::pair<double, bool>>> by_phone;
  for (const auto &s : dev) {
    if (!std::isfinite(s.score)) throw NumericError("non-finite score in calibration set");
    pooled.push_back({s.score, s.mispronounced});
    by_phone[s.phone].push_back({s.score, s.mispronounced});
  }
  ThresholdTable table;
  const auto global = BestThreshold(pooled);
  if (!global) throw DataError("calibration set needs both correct and mispronounced labels");
  table.global = *global;
  for (auto &[phone, scored] : by_phone) {
    if (scored.size() < options.min_count) continue;
    if (auto t = BestThreshold(std::move(scored))) table.per_phone[phone] = *t;
  }
  return table;
}

std::vector<bool> Detect(const ScoreReport &report, const ThresholdTable &thresholds) {
  std::vector<bool> flags;
  flags.reserve(report.per_phone.size());
  for (const auto &p : report.per_phone) flags.push_back(p.score < thresholds.For(p.phone));
  return flags;
}

void ApplyDetection(ScoreReport &report, const ThresholdTable &thresholds) {
  const auto flags = Detect(report, thresholds);
  for (size_t i = 0; i < flags.size(); ++i) report.per_phone[i].detected_mispronounced = flags[i];
}

void WriteThresholds(std::ostream &os, const ThresholdTable &table, const PhoneSet &phones) {
  for (const auto &[phone, t] : table.per_phone)
    os << phones.label(phone) << '\t' << FormatDouble(t) << '\n';
  os << "GLOBAL\t" << FormatDouble(table.global) << '\n';
}

ThresholdTable ReadThresholds(std::istream &is, const PhoneSet &phones) {
  ThresholdTable table;
  bool have_global = false;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto fields = SplitTabs(line);
    if (fields.size() != 2) throw LineError(line_no, "expected label<TAB>threshold");
    const double t = ParseDouble(fields[1], line_no);
    if (fields[0] == "GLOBAL") {
      table.global = t;
      have_global = true;
      continue;
    }
    const auto phone = phones.find(fields[0]);
    if (!phone) throw LineError(line_no, "unknown phone '" + std::string(fields[0]) + "'");
    table.per_phone[*phone] = t;
  }
  if (!have_global) throw DataError("threshold table lacks a GLOBAL line");
  return table;
}

}  // namespace cagop
