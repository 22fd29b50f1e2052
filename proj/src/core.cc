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

#include "cagop/core.h"

#include <cmath>
#include <sstream>

namespace cagop {

PhoneSet::PhoneSet(std::vector<std::string> phones,
                   std::optional<PhoneIndex> silence_index)
    : phones_(std::move(phones)), silence_index_(silence_index) {
  if (phones_.empty()) throw DataError("phone set is empty");
  for (size_t i = 0; i < phones_.size(); ++i) {
    const std::string &label = phones_[i];
    if (label.empty()) throw DataError("empty phone label at index " + std::to_string(i));
    if (!lookup_.emplace(label, static_cast<PhoneIndex>(i)).second)
      throw DataError("duplicate phone label '" + label + "'");
  }
  if (silence_index_ && !valid(*silence_index_))
    throw DataError("silence index " + std::to_string(*silence_index_) +
                    " out of range");
}

const std::string &PhoneSet::label(PhoneIndex index) const {
  if (!valid(index)) throw DataError("phone index " + std::to_string(index) + " out of range");
  return phones_[static_cast<size_t>(index)];
}

std::optional<PhoneIndex> PhoneSet::find(std::string_view label) const {
  auto it = lookup_.find(std::string(label));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

PhoneIndex PhoneSet::index(std::string_view label) const {
  if (auto found = find(label)) return *found;
  throw DataError("unknown phone label '" + std::string(label) + "'");
}

Posteriorgram ValidatePosteriorgram(Posteriorgram pg, const PhoneSet &phone_set) {
  if (pg.num_frames() < 1) throw DataError("posteriorgram has no frames");
  if (static_cast<size_t>(pg.num_phones()) != phone_set.size()) {
    std::ostringstream msg;
    msg << "posteriorgram has " << pg.num_phones() << " columns but phone set has "
        << phone_set.size() << " phones";
    throw DataError(msg.str());
  }
  if (!(pg.frame_shift_ms > 0.0) || !std::isfinite(pg.frame_shift_ms))
    throw DataError("frame shift must be positive");
  for (Eigen::Index t = 0; t < pg.num_frames(); ++t) {
    auto row = pg.probs.row(t);
    for (Eigen::Index a = 0; a < row.size(); ++a) {
      const double p = row(a);
      if (!std::isfinite(p))
        throw DataError("non-finite posterior at frame " + std::to_string(t));
      if (p < 0.0 || p > 1.0) {
        std::ostringstream msg;
        msg << "posterior " << p << " outside [0,1] at frame " << t;
        throw DataError(msg.str());
      }
    }
    const double sum = row.sum();
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream msg;
      msg.precision(10);
      msg << "row sum " << sum << " at frame " << t << " is not 1";
      throw DataError(msg.str());
    }
    if (sum != 1.0) row /= sum;
  }
  return pg;
}

void CheckSegmentBounds(const Posteriorgram &pg, const PhoneSegment &seg) {
  if (seg.start < 0 || seg.length < 1 || seg.end() > pg.num_frames()) {
    std::ostringstream msg;
    msg << "segment [" << seg.start << ", +" << seg.length
        << ") outside posteriorgram of " << pg.num_frames() << " frames";
    throw DataError(msg.str());
  }
}

SegmentRows SliceSegment(const Posteriorgram &pg,
                        const PhoneSegment &seg) {
  CheckSegmentBounds(pg, seg);
  return pg.probs.middleRows(seg.start, seg.length);
}

void CheckAlignment(const Alignment &alignment, const PhoneSet &phone_set,
                    const std::vector<PhoneIndex> &reference_phones,
                    std::optional<int64_t> num_frames) {
  const auto &segs = alignment.segments;
  for (size_t i = 0; i < segs.size(); ++i) {
    const PhoneSegment &s = segs[i];
    if (!phone_set.valid(s.phone))
      throw DataError("alignment segment " + std::to_string(i) + " has invalid phone");
    if (s.start < 0 || s.length < 1)
      throw DataError("alignment segment " + std::to_string(i) + " has invalid extent");
    if (num_frames && s.end() > *num_frames)
      throw DataError("alignment segment " + std::to_string(i) + " exceeds frame count");
    if (i > 0 && segs[i - 1].end() != s.start)
      throw DataError("alignment segments " + std::to_string(i - 1) + " and " +
                      std::to_string(i) + " are not contiguous");
  }
  if (!reference_phones.empty()) {
    std::vector<PhoneIndex> spoken;
    for (const auto &s : SpeechSegments(alignment, phone_set)) spoken.push_back(s.phone);
    if (spoken != reference_phones)
      throw DataError("alignment phones do not match the reference sequence");
  }
}

std::vector<PhoneSegment> SpeechSegments(const Alignment &alignment,
                                         const PhoneSet &phone_set) {
  std::vector<PhoneSegment> out;
  out.reserve(alignment.segments.size());
  for (const auto &s : alignment.segments)
    if (!phone_set.is_silence(s.phone)) out.push_back(s);
  return out;
}

}  // namespace cagop
