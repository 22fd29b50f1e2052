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

#include "cagop/synth.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace cagop {
namespace {

enum class PhoneClass { kLongVowel, kShortVowel, kStop, kNasal, kFricative };

struct PhoneInfo {
  const char *label;
  PhoneClass cls;
  double base;  // frames
  bool voiced;
};

constexpr PhoneInfo kPhones[] = {
    {"AA", PhoneClass::kLongVowel, 6.5, true},  {"AE", PhoneClass::kLongVowel, 6.0, true},
    {"IY", PhoneClass::kLongVowel, 6.0, true},  {"OW", PhoneClass::kLongVowel, 6.5, true},
    {"UW", PhoneClass::kLongVowel, 6.0, true},  {"AH", PhoneClass::kShortVowel, 4.0, true},
    {"EH", PhoneClass::kShortVowel, 4.5, true}, {"IH", PhoneClass::kShortVowel, 4.0, true},
    {"B", PhoneClass::kStop, 2.5, true},        {"D", PhoneClass::kStop, 2.5, true},
    {"G", PhoneClass::kStop, 2.5, true},        {"K", PhoneClass::kStop, 3.0, false},
    {"P", PhoneClass::kStop, 3.0, false},       {"T", PhoneClass::kStop, 2.5, false},
    {"M", PhoneClass::kNasal, 3.0, true},       {"N", PhoneClass::kNasal, 3.0, true},
    {"S", PhoneClass::kFricative, 4.0, false},  {"Z", PhoneClass::kFricative, 3.5, true},
};
constexpr int kNumSpeech = static_cast<int>(std::size(kPhones));
constexpr PhoneIndex kSilence = kNumSpeech;

bool IsVowel(PhoneIndex p) {
  return kPhones[p].cls == PhoneClass::kLongVowel || kPhones[p].cls == PhoneClass::kShortVowel;
}

// Distributions are written out by hand so that corpora are identical across
// standard library implementations.
double Uniform(Rng &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double Uniform(Rng &rng, double lo, double hi) { return lo + (hi - lo) * Uniform(rng); }
int UniformInt(Rng &rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<uint64_t>(hi - lo + 1));
}
double Normal(Rng &rng) {
  const double u1 = std::max(Uniform(rng), 1e-300);
  const double u2 = Uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Random distribution over all phones, concentrated on a few entries.
Eigen::RowVectorXd Clutter(Rng &rng, int num_phones, double skew) {
  Eigen::RowVectorXd w(num_phones);
  for (int a = 0; a < num_phones; ++a) w(a) = std::pow(Uniform(rng), skew) + 1e-6;
  return w / w.sum();
}

Eigen::RowVectorXd OneHot(int num_phones, PhoneIndex p) {
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(num_phones);
  v(p) = 1.0;
  return v;
}

PhoneIndex Confusable(PhoneIndex ref, Rng &rng) {
  std::vector<PhoneIndex> same;
  for (PhoneIndex p = 0; p < kNumSpeech; ++p)
    if (p != ref && kPhones[p].cls == kPhones[ref].cls) same.push_back(p);
  if (same.empty() || Uniform(rng) < 0.3) {
    PhoneIndex p;
    do p = static_cast<PhoneIndex>(UniformInt(rng, 0, kNumSpeech - 1));
    while (p == ref);
    return p;
  }
  return same[static_cast<size_t>(UniformInt(rng, 0, static_cast<int>(same.size()) - 1))];
}

std::vector<double> RuleDurations(const std::vector<PhoneIndex> &phones, double rate, Rng &rng) {
  std::vector<double> d(phones.size());
  for (size_t i = 0; i < phones.size(); ++i) {
    const PhoneIndex p = phones[i];
    double base = kPhones[p].base;
    if (IsVowel(p) && i + 1 < phones.size() && !IsVowel(phones[i + 1]) &&
        kPhones[phones[i + 1]].voiced)
      base += 1.0;
    if (!IsVowel(p) && i > 0 && !IsVowel(phones[i - 1])) base -= 0.5;
    if (i + 1 == phones.size()) base += 1.5;
    d[i] = std::max(1.0, rate * base + 0.3 * Normal(rng));
  }
  return d;
}

struct Segment {
  PhoneIndex produced;
  PhoneIndex reference;  // silence for silence segments
  int frames;
  double clarity;
  double leakage;  // mass on the reference phone when substituted
};

}  // namespace

PhoneSet SynthPhoneSet() {
  std::vector<std::string> labels;
  for (const auto &p : kPhones) labels.emplace_back(p.label);
  labels.emplace_back("SIL");
  return PhoneSet(std::move(labels), kSilence);
}

DurationSample SynthDurationSample(const std::vector<PhoneIndex> &phones, Rng &rng) {
  const double rate = Uniform(rng, 0.7, 1.5);
  return DurationSample::FromDurations(phones, RuleDurations(phones, rate, rng));
}

std::vector<DurationSample> SynthDurationCorpus(int count, int min_len, int max_len, Rng &rng) {
  std::vector<DurationSample> out;
  out.reserve(static_cast<size_t>(count));
  for (int n = 0; n < count; ++n) {
    std::vector<PhoneIndex> phones(static_cast<size_t>(UniformInt(rng, min_len, max_len)));
    for (auto &p : phones) p = static_cast<PhoneIndex>(UniformInt(rng, 0, kNumSpeech - 1));
    out.push_back(SynthDurationSample(phones, rng));
  }
  return out;
}

TranscriptList SynthCorpus::Transcripts() const {
  TranscriptList out;
  for (const auto &u : utterances) out.push_back({u.id, u.words});
  return out;
}

SynthCorpus GenerateCorpus(const SynthConfig &cfg) {
  if (cfg.num_utterances < 1 || cfg.min_words < 1 || cfg.max_words < cfg.min_words ||
      cfg.vocabulary_size < 1 || cfg.num_raters < 1)
    throw UsageError("invalid synthetic corpus configuration");
  Rng rng(cfg.seed);
  SynthCorpus corpus;
  corpus.phones = SynthPhoneSet();
  const int num_phones = static_cast<int>(corpus.phones.size());

  // Vocabulary: words alternate consonant and vowel clusters.
  std::vector<std::pair<std::string, std::vector<PhoneIndex>>> vocab;
  for (int w = 0; w < cfg.vocabulary_size; ++w) {
    std::vector<PhoneIndex> pron(static_cast<size_t>(UniformInt(rng, 2, 5)));
    bool vowel = Uniform(rng) < 0.5;
    for (auto &p : pron) {
      do p = static_cast<PhoneIndex>(UniformInt(rng, 0, kNumSpeech - 1));
      while (IsVowel(p) != vowel);
      vowel = !vowel;
    }
    std::string word = "W" + std::to_string(w);
    corpus.lexicon.Add(word, pron);
    vocab.push_back({word, pron});
  }
  auto random_words = [&]() {
    std::vector<std::string> words(static_cast<size_t>(UniformInt(rng, cfg.min_words, cfg.max_words)));
    for (auto &w : words) w = vocab[static_cast<size_t>(UniformInt(rng, 0, cfg.vocabulary_size - 1))].first;
    return words;
  };

  for (int u = 0; u < cfg.num_utterances; ++u) {
    SynthUtterance utt;
    char id[32];
    std::snprintf(id, sizeof(id), "utt%04d", u);
    utt.id = id;
    utt.words = random_words();
    utt.reference_phones = TextToPhones(utt.words, corpus.lexicon);
    const size_t n = utt.reference_phones.size();
    const double rate = Uniform(rng, 0.7, 1.5);
    const std::vector<double> durations = RuleDurations(utt.reference_phones, rate, rng);
    // Some speakers make more errors than others.
    const double speaker_error = std::clamp(cfg.error_rate * Uniform(rng, 0.2, 2.0), 0.0, 0.9);

    std::vector<Segment> segs;
    segs.push_back({kSilence, kSilence, UniformInt(rng, 2, 4), Uniform(rng, 0.85, 0.98), 0.0});
    utt.mispronounced.assign(n, false);
    for (size_t i = 0; i < n; ++i) {
      const PhoneIndex ref = utt.reference_phones[i];
      Segment s{ref, ref, 0, 0.0, 0.0};
      double frames = durations[i];
      s.clarity = Uniform(rng) < 0.1 ? Uniform(rng, 0.35, 0.6) : Uniform(rng, 0.6, 0.95);
      if (Uniform(rng) < speaker_error) {
        utt.mispronounced[i] = true;
        if (Uniform(rng) < cfg.duration_error_share) {
          frames *= Uniform(rng) < 0.6 ? Uniform(rng, 2.0, 3.0) : Uniform(rng, 0.3, 0.5);
          s.clarity = Uniform(rng, 0.45, 0.8);
        } else {
          s.produced = Confusable(ref, rng);
          s.leakage = Uniform(rng, 0.02, 0.3);
          s.clarity = Uniform(rng, 0.5, 0.9);
          if (Uniform(rng) < 0.5) frames *= Uniform(rng, 1.5, 2.5);
        }
      }
      s.frames = std::max(1, static_cast<int>(std::lround(frames)));
      segs.push_back(s);
    }
    segs.push_back({kSilence, kSilence, UniformInt(rng, 2, 4), Uniform(rng, 0.85, 0.98), 0.0});

    int total = 0;
    for (const auto &s : segs) total += s.frames;
    Posteriorgram &pg = utt.posteriorgram;
    pg.frame_shift_ms = cfg.frame_shift_ms;
    pg.probs.resize(total, num_phones);
    int t = 0;
    for (size_t k = 0; k < segs.size(); ++k) {
      const Segment &s = segs[k];
      utt.true_alignment.segments.push_back({s.reference, t, s.frames});
      // Transition frames sit at the end of a segment, blending into the
      // next phone with a diffuse posterior.  Longer phones may also carry a
      // short diffuse burst away from the boundary.
      int transition = 0;
      if (k + 1 < segs.size() && s.frames > 1) {
        const double r = Uniform(rng);
        transition = std::min(s.frames - 1, r < 0.3 ? 0 : (r < 0.7 ? 1 : 2));
      }
      int burst_begin = 0, burst_end = 0;
      if (s.reference != kSilence && s.frames - transition >= 4 && Uniform(rng) < 0.3) {
        burst_begin = UniformInt(rng, 1, s.frames - transition - 2);
        burst_end = burst_begin + 1 + (Uniform(rng) < 0.4 ? 1 : 0);
      }
      for (int f = 0; f < s.frames; ++f, ++t) {
        const double clarity = std::clamp(s.clarity + 0.05 * Normal(rng), 0.2, 0.97);
        Eigen::RowVectorXd row = clarity * OneHot(num_phones, s.produced);
        double rest = 1.0 - clarity;
        if (s.produced != s.reference) {
          const double leak = std::min(s.leakage, rest * 0.9);
          row += leak * OneHot(num_phones, s.reference);
          rest -= leak;
        }
        row += rest * Clutter(rng, num_phones, 4.0);
        if (f >= s.frames - transition) {
          const double lambda = Uniform(rng, 0.3, 0.7);
          Eigen::RowVectorXd blend =
              (1.0 - lambda) * row + lambda * OneHot(num_phones, segs[k + 1].produced);
          row = 0.3 * blend + 0.7 * Clutter(rng, num_phones, 1.0);
        } else if (f >= burst_begin && f < burst_end) {
          row = 0.3 * row + 0.7 * Clutter(rng, num_phones, 1.0);
        }
        pg.probs.row(t) = row / row.sum();
      }
    }

    // Sentence ratings fall with the error rate; raters add their own noise.
    size_t errors = 0;
    for (bool b : utt.mispronounced) errors += b ? 1 : 0;
    const double quality = 10.0 * (1.0 - 2.0 * static_cast<double>(errors) / static_cast<double>(n));
    for (int r = 0; r < cfg.num_raters; ++r)
      corpus.annotations.sentence_scores[utt.id]["R" + std::to_string(r + 1)] =
          std::clamp(std::round((quality + 1.2 * Normal(rng)) * 10.0) / 10.0, 0.0, 10.0);
    for (size_t i = 0; i < n; ++i) corpus.annotations.phone_labels[utt.id][i] = utt.mispronounced[i];
    corpus.utterances.push_back(std::move(utt));
  }

  auto native = [&](int count, const std::string &prefix) {
    DurationCorpus out;
    for (int i = 0; i < count; ++i) {
      const auto phones = TextToPhones(random_words(), corpus.lexicon);
      const auto trimmed = std::vector<PhoneIndex>(
          phones.begin(), phones.begin() + std::min<size_t>(phones.size(), 100));
      char id[32];
      std::snprintf(id, sizeof(id), "%s%04d", prefix.c_str(), i);
      out.push_back({id, SynthDurationSample(trimmed, rng)});
    }
    return out;
  };
  corpus.native_train = native(cfg.native_train, "nat");
  corpus.native_valid = native(cfg.native_valid, "val");
  return corpus;
}

void WriteCorpus(const std::string &dir, const SynthCorpus &corpus) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "post", ec);
  if (ec) throw DataError("cannot create " + dir + ": " + ec.message());
  auto text = [&](const std::string &name, auto &&writer) {
    std::ostringstream os;
    writer(os);
    WriteFile((fs::path(dir) / name).string(), os.str());
  };
  text("phones.txt", [&](std::ostream &os) { WritePhoneSet(os, corpus.phones); });
  text("lexicon.txt", [&](std::ostream &os) { WriteLexicon(os, corpus.lexicon, corpus.phones); });
  text("text.txt", [&](std::ostream &os) { WriteTranscripts(os, corpus.Transcripts()); });
  text("annotations.tsv", [&](std::ostream &os) { WriteAnnotations(os, corpus.annotations); });
  text("alignments_true.tsv", [&](std::ostream &os) {
    AlignmentList list;
    for (const auto &u : corpus.utterances) list.push_back({u.id, u.true_alignment});
    WriteAlignments(os, list, corpus.phones);
  });
  text("durations_train.tsv",
       [&](std::ostream &os) { WriteDurationCorpus(os, corpus.native_train, corpus.phones); });
  text("durations_valid.tsv",
       [&](std::ostream &os) { WriteDurationCorpus(os, corpus.native_valid, corpus.phones); });
  for (const auto &u : corpus.utterances)
    SavePosteriorgram((fs::path(dir) / "post" / (u.id + ".cagpg")).string(), u.posteriorgram);
}

}  // namespace cagop
