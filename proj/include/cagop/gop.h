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

#ifndef CAGOP_GOP_H_
#define CAGOP_GOP_H_

#include <span>
#include <utility>
#include <vector>

#include "cagop/core.h"

namespace cagop {

/// Entropy floor used before taking reciprocals in the transition-aware
/// weighting. A one-hot frame then dominates without overflowing.
inline constexpr double kEntropyFloor = 1e-8;

struct FrameScores {
  std::vector<double> log_posteriors;  // log p(a|o_t), floored
  std::vector<double> entropies;       // nats
  std::vector<double> weights;         // normalized reciprocal entropies
};

/// Duration-normalized log posterior of seg.phone over the segment.
double Gop(const Posteriorgram &pg, const PhoneSegment &seg);

/// Log posterior of seg.phone at frame start + floor(length / 2).
double CenterGop(const Posteriorgram &pg, const PhoneSegment &seg);

/// Shannon entropy in nats, with 0 log 0 = 0. Throws DataError unless `row`
/// is a distribution (non-negative, sums to 1 within 1e-6).
double FrameEntropy(std::span<const double> row);

/// Frame log posteriors weighted by normalized reciprocal entropy.
std::pair<double, FrameScores> TaScore(const Posteriorgram &pg, const PhoneSegment &seg);

std::vector<double> EntropyProfile(const Posteriorgram &pg);

}  // namespace cagop

#endif  // CAGOP_GOP_H_
