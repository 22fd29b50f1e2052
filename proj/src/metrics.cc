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

#include "cagop/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cagop/core.h"

namespace cagop {

void ConfusionCounts::Add(bool predicted, bool actual) {
  if (predicted && actual) ++tp;
  else if (predicted) ++fp;
  else if (actual) ++fn;
  else ++tn;
}

ConfusionCounts Count(const std::vector<bool> &predicted, const std::vector<bool> &actual) {
  if (predicted.size() != actual.size()) throw DataError("prediction/label count mismatch");
  ConfusionCounts c;
  for (size_t i = 0; i < predicted.size(); ++i) c.Add(predicted[i], actual[i]);
  return c;
}

double Mae(const std::vector<double> &pred, const std::vector<double> &truth,
           double frame_shift_ms) {
  if (pred.size() != truth.size()) throw DataError("MAE inputs differ in length");
  if (pred.empty()) throw DataError("MAE of empty inputs");
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - truth[i]);
  return sum / static_cast<double>(pred.size()) * frame_shift_ms;
}

double Accuracy(const ConfusionCounts &c) {
  if (c.total() <= 0) throw NumericError("accuracy of an empty confusion table");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double F1(const ConfusionCounts &c) {
  const int64_t denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0) throw NumericError("F1 undefined: no positive predictions or labels");
  return static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

double Pearson(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() != y.size()) throw DataError("correlation inputs differ in length");
  if (x.size() < 2) throw DataError("correlation needs at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericError("correlation undefined for constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> FractionalRanks(const std::vector<double> &x) {
  std::vector<size_t> order(x.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double Spearman(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() != y.size()) throw DataError("correlation inputs differ in length");
  return Pearson(FractionalRanks(x), FractionalRanks(y));
}

double MeanRaterCorrelation(const std::vector<double> &scores,
                            const std::vector<std::vector<double>> &raters,
                            CorrelationKind kind) {
  if (raters.empty()) throw DataError("no raters");
  double sum = 0.0;
  for (const auto &r : raters)
    sum += kind == CorrelationKind::kPearson ? Pearson(scores, r) : Spearman(scores, r);
  return sum / static_cast<double>(raters.size());
}

}  // namespace cagop
