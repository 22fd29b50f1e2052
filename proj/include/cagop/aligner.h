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

#ifndef CAGOP_ALIGNER_H_
#define CAGOP_ALIGNER_H_

#include <optional>
#include <vector>

#include "cagop/core.h"

namespace cagop {

struct AlignConfig {
  bool allow_optional_silence = false;
  // Required when allow_optional_silence is set.
  std::optional<PhoneIndex> silence_phone;
  int64_t min_segment_frames = 1;
  // Added to the log score of every silence frame.
  double silence_self_loop_penalty = 0.0;
};

/// Monotonic segmentation of `pg` into `phones` (in order) maximizing the
/// summed floored log posterior of each frame's assigned phone. Optional
/// silence segments may appear before, between and after phones. Among equal
/// scoring segmentations the one with the earliest boundaries wins, and at a
/// shared boundary a phone is preferred over a silence.
Alignment Align(const Posteriorgram &pg, const std::vector<PhoneIndex> &phones,
                const AlignConfig &cfg = {});

/// Sum over segments and frames of log(max(p(phone|o_t), 1e-10)).
double AlignmentLogScore(const Posteriorgram &pg, const Alignment &alignment);

}  // namespace cagop

#endif  // CAGOP_ALIGNER_H_
