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

#ifndef CAGOP_IO_H_
#define CAGOP_IO_H_

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cagop/core.h"
#include "cagop/duration_net.h"

namespace cagop {

// Phone set: one label per line; a second field "silence" marks the silence
// phone.
PhoneSet ReadPhoneSet(std::istream &is);
void WritePhoneSet(std::ostream &os, const PhoneSet &phones);

// Binary posteriorgram, little-endian:
//   "CAGPG1" | u32 num_frames | u32 num_phones | f32 frame_shift_ms |
//   f32 body[num_frames * num_phones], row-major.
// Values are widened to 64 bits on load. Readers return the matrix as
// stored; run ValidatePosteriorgram before scoring.
void WritePosteriorgramBinary(std::ostream &os, const Posteriorgram &pg);
Posteriorgram ReadPosteriorgramBinary(std::istream &is);

// Text twin: `frames=<F> phones=<A> shift_ms=<ms>` then F rows of A numbers.
void WritePosteriorgramText(std::ostream &os, const Posteriorgram &pg);
Posteriorgram ReadPosteriorgramText(std::istream &is);

/// Picks the binary or text reader by sniffing the magic.
Posteriorgram LoadPosteriorgram(const std::string &path);
void SavePosteriorgram(const std::string &path, const Posteriorgram &pg, bool text = false);

/// Utterance alignments in file order.
using AlignmentList = std::vector<std::pair<std::string, Alignment>>;

// `utt_id<TAB>phone_label<TAB>start_frame<TAB>num_frames`
void WriteAlignments(std::ostream &os, const AlignmentList &alignments, const PhoneSet &phones);
AlignmentList ReadAlignments(std::istream &is, const PhoneSet &phones);

struct Annotations {
  // utt_id -> per reference position, 1 = mispronounced.
  std::map<std::string, std::map<size_t, bool>> phone_labels;
  // utt_id -> rater_id -> score in [0, 10].
  std::map<std::string, std::map<std::string, double>> sentence_scores;

  bool operator==(const Annotations &) const = default;
};

// Phone lines `utt_id<TAB>position<TAB>0|1`, sentence lines
// `utt_id<TAB>rater_id<TAB>score`. Rater ids may not be plain integers,
// which is what tells the two line kinds apart.
void WriteAnnotations(std::ostream &os, const Annotations &annotations);
Annotations ReadAnnotations(std::istream &is);

class Lexicon {
 public:
  /// Words are stored uppercase.
  void Add(const std::string &word, std::vector<PhoneIndex> phones);
  const std::vector<PhoneIndex> *Find(const std::string &word) const;
  const std::map<std::string, std::vector<PhoneIndex>> &entries() const { return entries_; }
  bool operator==(const Lexicon &) const = default;

 private:
  std::map<std::string, std::vector<PhoneIndex>> entries_;
};

// `WORD<TAB>phone labels...`
Lexicon ReadLexicon(std::istream &is, const PhoneSet &phones);
void WriteLexicon(std::ostream &os, const Lexicon &lexicon, const PhoneSet &phones);

/// Concatenated pronunciations; throws DataError naming the first
/// out-of-vocabulary word.
std::vector<PhoneIndex> TextToPhones(const std::vector<std::string> &words,
                                     const Lexicon &lexicon);

/// Transcripts: `utt_id` followed by whitespace-separated words.
using TranscriptList = std::vector<std::pair<std::string, std::vector<std::string>>>;
TranscriptList ReadTranscripts(std::istream &is);
void WriteTranscripts(std::ostream &os, const TranscriptList &transcripts);

/// Duration corpus: `utt_id<TAB>phone labels<TAB>durations` with space
/// separated lists; speed is recomputed as the mean duration.
using DurationCorpus = std::vector<std::pair<std::string, DurationSample>>;
void WriteDurationCorpus(std::ostream &os, const DurationCorpus &corpus, const PhoneSet &phones);
DurationCorpus ReadDurationCorpus(std::istream &is, const PhoneSet &phones);

/// JSON array of reports; doubles round-trip exactly.
std::string ReportsToJson(const std::vector<ScoreReport> &reports, const PhoneSet &phones);
std::vector<ScoreReport> ReportsFromJson(const std::string &json, const PhoneSet &phones);

/// Whole-file helpers; throw DataError if the file cannot be opened.
std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, const std::string &contents);

}  // namespace cagop

#endif  // CAGOP_IO_H_
