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

#ifndef CAGOP_METRICS_H_
#define CAGOP_METRICS_H_

#include <cstdint>
#include <vector>

namespace cagop {

/// Positive class is "mispronounced".
struct ConfusionCounts {
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;

  int64_t total() const { return tp + fp + fn + tn; }
  void Add(bool predicted, bool actual);
  bool operator==(const ConfusionCounts &) const = default;
};

ConfusionCounts Count(const std::vector<bool> &predicted, const std::vector<bool> &actual);

/// Mean absolute error in frames times the frame shift, in milliseconds.
double Mae(const std::vector<double> &pred, const std::vector<double> &truth,
           double frame_shift_ms);

double Accuracy(const ConfusionCounts &c);
/// 2tp / (2tp + fp + fn). Throws NumericError when tp = fp = fn = 0.
double F1(const ConfusionCounts &c);

/// Throws NumericError when either input is constant.
double Pearson(const std::vector<double> &x, const std::vector<double> &y);
/// 1-based fractional ranks; tied values share their average rank.
std::vector<double> FractionalRanks(const std::vector<double> &x);
double Spearman(const std::vector<double> &x, const std::vector<double> &y);

enum class CorrelationKind { kPearson, kSpearman };

/// Mean over raters of the correlation between `scores` and each rater.
double MeanRaterCorrelation(const std::vector<double> &scores,
                            const std::vector<std::vector<double>> &raters,
                            CorrelationKind kind);

}  // namespace cagop

#endif  // CAGOP_METRICS_H_
