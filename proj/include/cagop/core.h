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

#ifndef CAGOP_CORE_H_
#define CAGOP_CORE_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace cagop {

using PhoneIndex = int32_t;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// Contiguous run of posteriorgram rows.
using SegmentRows = Eigen::Block<const RowMatrix, Eigen::Dynamic, Eigen::Dynamic, true>;

/// Probability floor applied before every log of a posterior.
inline constexpr double kProbFloor = 1e-10;
/// Row sums within this distance of 1 are accepted and renormalized.
inline constexpr double kRowSumTolerance = 1e-6;
inline constexpr double kDefaultFrameShiftMs = 30.0;

// Error categories map onto CLI exit codes (1 usage, 2 data, 3 numeric).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class UsageError : public Error {
 public:
  using Error::Error;
};
class DataError : public Error {
 public:
  using Error::Error;
};
class NumericError : public Error {
 public:
  using Error::Error;
};

class PhoneSet {
 public:
  PhoneSet() = default;
  /// Throws DataError on empty or duplicate labels, or a bad silence index.
  explicit PhoneSet(std::vector<std::string> phones,
                    std::optional<PhoneIndex> silence_index = std::nullopt);

  size_t size() const { return phones_.size(); }
  const std::string &label(PhoneIndex index) const;
  /// Throws DataError for unknown labels.
  PhoneIndex index(std::string_view label) const;
  std::optional<PhoneIndex> find(std::string_view label) const;
  bool valid(PhoneIndex index) const {
    return index >= 0 && static_cast<size_t>(index) < phones_.size();
  }
  const std::vector<std::string> &phones() const { return phones_; }
  std::optional<PhoneIndex> silence_index() const { return silence_index_; }
  bool is_silence(PhoneIndex index) const {
    return silence_index_ && *silence_index_ == index;
  }

  bool operator==(const PhoneSet &other) const {
    return phones_ == other.phones_ && silence_index_ == other.silence_index_;
  }

 private:
  std::vector<std::string> phones_;
  std::optional<PhoneIndex> silence_index_;
  std::unordered_map<std::string, PhoneIndex> lookup_;
};

/// F x |A| matrix of frame posteriors p(a'|o_t).
struct Posteriorgram {
  double frame_shift_ms = kDefaultFrameShiftMs;
  RowMatrix probs;

  Eigen::Index num_frames() const { return probs.rows(); }
  Eigen::Index num_phones() const { return probs.cols(); }
};

struct PhoneSegment {
  PhoneIndex phone = 0;
  int64_t start = 0;
  int64_t length = 1;

  int64_t end() const { return start + length; }
  bool operator==(const PhoneSegment &) const = default;
};

struct Alignment {
  std::vector<PhoneSegment> segments;

  bool operator==(const Alignment &) const = default;
};

struct Utterance {
  std::string id;
  std::vector<PhoneIndex> reference_phones;
  Posteriorgram posteriorgram;
  std::optional<Alignment> alignment;
};

struct PhoneScore {
  PhoneIndex phone = 0;
  PhoneSegment segment;
  double gop = 0.0;
  double center_gop = 0.0;
  double tascore = 0.0;
  // Absent when no duration information was supplied.
  std::optional<double> delta;
  std::optional<double> cagop;
  // The configured variant's score; sentence_score averages this field.
  double score = 0.0;
  bool detected_mispronounced = false;

  bool operator==(const PhoneScore &) const = default;
};

struct ScoreReport {
  std::string utterance_id;
  std::string variant;
  std::vector<PhoneScore> per_phone;
  double sentence_score = 0.0;

  bool operator==(const ScoreReport &) const = default;
};

/// Checks shape, range and normalization. Rows whose sums are within
/// kRowSumTolerance of 1 are divided by their sum.
Posteriorgram ValidatePosteriorgram(Posteriorgram pg, const PhoneSet &phone_set);

/// Rows [seg.start, seg.end()) of the posteriorgram.
SegmentRows SliceSegment(const Posteriorgram &pg,
                        const PhoneSegment &seg);

/// Throws DataError unless the segment lies inside the posteriorgram.
void CheckSegmentBounds(const Posteriorgram &pg, const PhoneSegment &seg);

/// Checks ordering and overlap, and that the non-silence segments spell out
/// `reference_phones` when it is non-empty.
void CheckAlignment(const Alignment &alignment, const PhoneSet &phone_set,
                    const std::vector<PhoneIndex> &reference_phones = {},
                    std::optional<int64_t> num_frames = std::nullopt);

/// Non-silence segments in order.
std::vector<PhoneSegment> SpeechSegments(const Alignment &alignment,
                                         const PhoneSet &phone_set);

}  // namespace cagop

#endif  // CAGOP_CORE_H_
