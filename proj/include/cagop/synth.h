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

#ifndef CAGOP_SYNTH_H_
#define CAGOP_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "cagop/core.h"
#include "cagop/duration_net.h"
#include "cagop/io.h"

namespace cagop {

// Seeded synthetic data for desk-scale experiments: a small phone inventory,
// a rule-based duration generator, and a pronunciation corpus whose
// posteriorgrams mimic an acoustic model (peaked frames, high-entropy
// transitions near segment ends, occasional diffuse bursts inside longer
// phones) with injected substitutions and duration
// distortions.

struct SynthConfig {
  uint64_t seed = 1;
  int num_utterances = 240;
  int min_words = 3;
  int max_words = 6;
  int vocabulary_size = 40;
  double error_rate = 0.15;
  // Share of injected errors that distort duration without substituting.
  double duration_error_share = 0.4;
  int num_raters = 3;
  int native_train = 500;
  int native_valid = 100;
  double frame_shift_ms = kDefaultFrameShiftMs;
};

/// Speech phones plus a trailing "SIL" silence phone.
PhoneSet SynthPhoneSet();

/// Durations (frames) from phone class, neighbours, phrase-final
/// lengthening, a per-utterance speaking rate and Gaussian noise. The sample
/// speed is the mean duration.
DurationSample SynthDurationSample(const std::vector<PhoneIndex> &phones, Rng &rng);

/// `count` random phone sequences of length [min_len, max_len] with rule
/// durations.
std::vector<DurationSample> SynthDurationCorpus(int count, int min_len, int max_len, Rng &rng);

struct SynthUtterance {
  std::string id;
  std::vector<std::string> words;
  std::vector<PhoneIndex> reference_phones;
  Posteriorgram posteriorgram;
  Alignment true_alignment;
  std::vector<bool> mispronounced;
};

struct SynthCorpus {
  PhoneSet phones;
  Lexicon lexicon;
  std::vector<SynthUtterance> utterances;
  Annotations annotations;
  DurationCorpus native_train;
  DurationCorpus native_valid;

  TranscriptList Transcripts() const;
};

SynthCorpus GenerateCorpus(const SynthConfig &cfg);

/// Writes phones.txt, lexicon.txt, text.txt, annotations.tsv,
/// alignments_true.tsv, durations_train.tsv, durations_valid.tsv and
/// post/<utt>.cagpg under `dir` (created if missing).
void WriteCorpus(const std::string &dir, const SynthCorpus &corpus);

}  // namespace cagop

#endif  // CAGOP_SYNTH_H_
