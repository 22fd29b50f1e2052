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

#include <algorithm>
#include <cmath>

namespace cagop {
namespace {

double FlooredLog(double p) { return std::log(std::max(p, kProbFloor)); }

void CheckPhone(const Posteriorgram &pg, PhoneIndex phone) {
  if (phone < 0 || phone >= pg.num_phones())
    throw DataError("phone index " + std::to_string(phone) + " out of range");
}

double RowEntropy(const RowMatrix &probs, Eigen::Index t) {
  const double *row = probs.data() + t * probs.cols();
  return FrameEntropy({row, static_cast<size_t>(probs.cols())});
}

}  // namespace

double Gop(const Posteriorgram &pg, const PhoneSegment &seg) {
  auto rows = SliceSegment(pg, seg);
  CheckPhone(pg, seg.phone);
  double sum = 0.0;
  for (Eigen::Index t = 0; t < rows.rows(); ++t) sum += FlooredLog(rows(t, seg.phone));
  return sum / static_cast<double>(seg.length);
}

double CenterGop(const Posteriorgram &pg, const PhoneSegment &seg) {
  CheckSegmentBounds(pg, seg);
  CheckPhone(pg, seg.phone);
  return FlooredLog(pg.probs(seg.start + seg.length / 2, seg.phone));
}

double FrameEntropy(std::span<const double> row) {
  double sum = 0.0;
  double entropy = 0.0;
  for (double p : row) {
    if (!(p >= 0.0) || p > 1.0) throw DataError("invalid probability in entropy input");
    sum += p;
    if (p > 0.0) entropy -= p * std::log(p);
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance)
    throw DataError("entropy input does not sum to 1");
  return std::max(entropy, 0.0);
}

std::pair<double, FrameScores> TaScore(const Posteriorgram &pg, const PhoneSegment &seg) {
  CheckSegmentBounds(pg, seg);
  CheckPhone(pg, seg.phone);
  const auto n = static_cast<size_t>(seg.length);
  FrameScores fs;
  fs.log_posteriors.resize(n);
  fs.entropies.resize(n);
  fs.weights.resize(n);
  double norm = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Index t = seg.start + static_cast<Eigen::Index>(i);
    fs.log_posteriors[i] = FlooredLog(pg.probs(t, seg.phone));
    fs.entropies[i] = RowEntropy(pg.probs, t);
    fs.weights[i] = 1.0 / std::max(fs.entropies[i], kEntropyFloor);
    norm += fs.weights[i];
  }
  double score = 0.0;
  for (size_t i = 0; i < n; ++i) {
    fs.weights[i] /= norm;
    score += fs.weights[i] * fs.log_posteriors[i];
  }
  return {score, std::move(fs)};
}

std::vector<double> EntropyProfile(const Posteriorgram &pg) {
  std::vector<double> out(static_cast<size_t>(pg.num_frames()));
  for (Eigen::Index t = 0; t < pg.num_frames(); ++t) out[t] = RowEntropy(pg.probs, t);
  return out;
}

}  // namespace cagop
