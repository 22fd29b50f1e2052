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

#include "cagop/io.h"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cagop/text_util.h"

namespace cagop {
namespace {

constexpr char kPosteriorMagic[6] = {'C', 'A', 'G', 'P', 'G', '1'};

template <typename T>
void PutLe(std::ostream &os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char *>(bytes), sizeof(T));
}

template <typename T>
T GetLe(std::istream &is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char *>(bytes), sizeof(T)))
    throw DataError("posteriorgram file is truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

bool IsPlainInteger(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(),
                                   [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::string Upper(std::string_view s) {
  std::string out(s);
  for (char &c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

PhoneSet ReadPhoneSet(std::istream &is) {
  std::vector<std::string> labels;
  std::optional<PhoneIndex> silence;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto fields = SplitWhitespace(line);
    if (fields.empty()) continue;
    if (fields.size() > 2 || (fields.size() == 2 && fields[1] != "silence"))
      throw LineError(line_no, "expected a phone label optionally followed by 'silence'");
    if (fields.size() == 2) {
      if (silence) throw LineError(line_no, "more than one silence phone");
      silence = static_cast<PhoneIndex>(labels.size());
    }
    labels.emplace_back(fields[0]);
  }
  return PhoneSet(std::move(labels), silence);
}

void WritePhoneSet(std::ostream &os, const PhoneSet &phones) {
  for (size_t i = 0; i < phones.size(); ++i) {
    os << phones.phones()[i];
    if (phones.is_silence(static_cast<PhoneIndex>(i))) os << " silence";
    os << '\n';
  }
}

void WritePosteriorgramBinary(std::ostream &os, const Posteriorgram &pg) {
  os.write(kPosteriorMagic, sizeof(kPosteriorMagic));
  PutLe<uint32_t>(os, static_cast<uint32_t>(pg.num_frames()));
  PutLe<uint32_t>(os, static_cast<uint32_t>(pg.num_phones()));
  PutLe<float>(os, static_cast<float>(pg.frame_shift_ms));
  for (Eigen::Index i = 0; i < pg.probs.size(); ++i)
    PutLe<float>(os, static_cast<float>(pg.probs.data()[i]));
  if (!os) throw DataError("failed writing posteriorgram");
}

Posteriorgram ReadPosteriorgramBinary(std::istream &is) {
  char magic[sizeof(kPosteriorMagic)];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kPosteriorMagic, sizeof(magic)) != 0)
    throw DataError("not a posteriorgram file (bad magic)");
  const uint32_t frames = GetLe<uint32_t>(is);
  const uint32_t phones = GetLe<uint32_t>(is);
  if (frames == 0 || phones == 0) throw DataError("posteriorgram header has zero dimensions");
  if (static_cast<uint64_t>(frames) * phones > (uint64_t{1} << 31))
    throw DataError("posteriorgram header dimensions are implausibly large");
  Posteriorgram pg;
  pg.frame_shift_ms = GetLe<float>(is);
  pg.probs.resize(frames, phones);
  for (Eigen::Index i = 0; i < pg.probs.size(); ++i) pg.probs.data()[i] = GetLe<float>(is);
  if (is.peek() != std::char_traits<char>::eof())
    throw DataError("posteriorgram body is longer than its header declares");
  return pg;
}

void WritePosteriorgramText(std::ostream &os, const Posteriorgram &pg) {
  os << "frames=" << pg.num_frames() << " phones=" << pg.num_phones()
     << " shift_ms=" << FormatDouble(pg.frame_shift_ms) << '\n';
  for (Eigen::Index t = 0; t < pg.num_frames(); ++t) {
    for (Eigen::Index a = 0; a < pg.num_phones(); ++a) {
      if (a) os << ' ';
      os << FormatDouble(pg.probs(t, a));
    }
    os << '\n';
  }
}

Posteriorgram ReadPosteriorgramText(std::istream &is) {
  std::string line;
  size_t line_no = 0;
  int64_t frames = -1, phones = -1;
  bool have_shift = false;
  Posteriorgram pg;
  while (std::getline(is, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    for (auto field : SplitWhitespace(line)) {
      const auto [key, value] = SplitKeyValue(field, line_no);
      if (key == "frames") frames = ParseInt(value, line_no);
      else if (key == "phones") phones = ParseInt(value, line_no);
      else if (key == "shift_ms") {
        pg.frame_shift_ms = ParseDouble(value, line_no);
        have_shift = true;
      }
      else throw LineError(line_no, "unknown header key '" + std::string(key) + "'");
    }
    break;
  }
  if (frames < 1 || phones < 1 || !have_shift)
    throw DataError("posteriorgram text header missing or invalid");
  pg.probs.resize(frames, phones);
  int64_t row = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto fields = SplitWhitespace(line);
    if (fields.empty()) continue;
    if (row >= frames) throw LineError(line_no, "more rows than the header declares");
    if (static_cast<int64_t>(fields.size()) != phones)
      throw LineError(line_no, "expected " + std::to_string(phones) + " values, got " +
                                   std::to_string(fields.size()));
    for (int64_t a = 0; a < phones; ++a) pg.probs(row, a) = ParseDouble(fields[a], line_no);
    ++row;
  }
  if (row != frames)
    throw DataError("posteriorgram text has " + std::to_string(row) + " rows, header says " +
                    std::to_string(frames));
  return pg;
}

Posteriorgram LoadPosteriorgram(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open posteriorgram " + path);
  char head[sizeof(kPosteriorMagic)] = {};
  is.read(head, sizeof(head));
  is.clear();
  is.seekg(0);
  try {
    if (std::memcmp(head, kPosteriorMagic, sizeof(head)) == 0) return ReadPosteriorgramBinary(is);
    return ReadPosteriorgramText(is);
  } catch (const DataError &e) {
    throw DataError(path + ": " + e.what());
  }
}

void SavePosteriorgram(const std::string &path, const Posteriorgram &pg, bool text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path + " for writing");
  if (text) WritePosteriorgramText(os, pg);
  else WritePosteriorgramBinary(os, pg);
}

void WriteAlignments(std::ostream &os, const AlignmentList &alignments, const PhoneSet &phones) {
  for (const auto &[utt, alignment] : alignments)
    for (const auto &s : alignment.segments)
      os << utt << '\t' << phones.label(s.phone) << '\t' << s.start << '\t' << s.length << '\n';
}

AlignmentList ReadAlignments(std::istream &is, const PhoneSet &phones) {
  AlignmentList out;
  std::map<std::string, size_t> index;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto f = SplitTabs(line);
    if (f.size() != 4) throw LineError(line_no, "expected utt<TAB>phone<TAB>start<TAB>frames");
    const std::string utt(f[0]);
    const auto phone = phones.find(f[1]);
    if (!phone) throw LineError(line_no, "unknown phone '" + std::string(f[1]) + "'");
    PhoneSegment seg{*phone, ParseInt(f[2], line_no), ParseInt(f[3], line_no)};
    if (seg.start < 0 || seg.length < 1) throw LineError(line_no, "invalid segment extent");
    auto [it, inserted] = index.emplace(utt, out.size());
    if (inserted) {
      out.push_back({utt, {}});
    } else if (it->second + 1 != out.size()) {
      throw LineError(line_no, "segments of utterance '" + utt + "' are not consecutive");
    }
    auto &segs = out[it->second].second.segments;
    if (!segs.empty() && segs.back().end() != seg.start)
      throw LineError(line_no, "segment does not start where the previous one ended");
    segs.push_back(seg);
  }
  return out;
}

void WriteAnnotations(std::ostream &os, const Annotations &a) {
  for (const auto &[utt, labels] : a.phone_labels)
    for (const auto &[pos, bad] : labels) os << utt << '\t' << pos << '\t' << (bad ? 1 : 0) << '\n';
  for (const auto &[utt, raters] : a.sentence_scores)
    for (const auto &[rater, score] : raters) {
      if (IsPlainInteger(rater))
        throw DataError("rater id '" + rater + "' would read back as a phone position");
      os << utt << '\t' << rater << '\t' << FormatDouble(score) << '\n';
    }
}

Annotations ReadAnnotations(std::istream &is) {
  Annotations a;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto f = SplitTabs(line);
    if (f.size() != 3) throw LineError(line_no, "expected 3 tab-separated fields");
    const std::string utt(f[0]);
    if (IsPlainInteger(f[1])) {
      const int64_t pos = ParseInt(f[1], line_no);
      if (f[2] != "0" && f[2] != "1") throw LineError(line_no, "phone label must be 0 or 1");
      if (!a.phone_labels[utt].emplace(static_cast<size_t>(pos), f[2] == "1").second)
        throw LineError(line_no, "duplicate label for position " + std::to_string(pos));
    } else {
      const double score = ParseDouble(f[2], line_no);
      if (score < 0.0 || score > 10.0) throw LineError(line_no, "sentence score outside [0, 10]");
      if (!a.sentence_scores[utt].emplace(std::string(f[1]), score).second)
        throw LineError(line_no, "duplicate score for rater '" + std::string(f[1]) + "'");
    }
  }
  return a;
}

void Lexicon::Add(const std::string &word, std::vector<PhoneIndex> phones) {
  if (word.empty() || phones.empty()) throw DataError("lexicon entries need a word and phones");
  entries_[Upper(word)] = std::move(phones);
}

const std::vector<PhoneIndex> *Lexicon::Find(const std::string &word) const {
  auto it = entries_.find(Upper(word));
  return it == entries_.end() ? nullptr : &it->second;
}

Lexicon ReadLexicon(std::istream &is, const PhoneSet &phones) {
  Lexicon lex;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto f = SplitTabs(line);
    if (f.size() != 2) throw LineError(line_no, "expected WORD<TAB>phones");
    std::vector<PhoneIndex> pron;
    for (auto label : SplitWhitespace(f[1])) {
      const auto p = phones.find(label);
      if (!p) throw LineError(line_no, "unknown phone '" + std::string(label) + "'");
      pron.push_back(*p);
    }
    const std::string word(Trim(f[0]));
    if (word.empty() || pron.empty()) throw LineError(line_no, "empty word or pronunciation");
    lex.Add(word, std::move(pron));
  }
  return lex;
}

void WriteLexicon(std::ostream &os, const Lexicon &lexicon, const PhoneSet &phones) {
  for (const auto &[word, pron] : lexicon.entries()) {
    os << word << '\t';
    for (size_t i = 0; i < pron.size(); ++i) os << (i ? " " : "") << phones.label(pron[i]);
    os << '\n';
  }
}

std::vector<PhoneIndex> TextToPhones(const std::vector<std::string> &words,
                                     const Lexicon &lexicon) {
  std::vector<PhoneIndex> out;
  for (const auto &w : words) {
    const auto *pron = lexicon.Find(w);
    if (!pron) throw DataError("out-of-vocabulary word '" + w + "'");
    out.insert(out.end(), pron->begin(), pron->end());
  }
  return out;
}

TranscriptList ReadTranscripts(std::istream &is) {
  TranscriptList out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto f = SplitWhitespace(line);
    if (f.empty()) continue;
    if (f.size() < 2) throw LineError(line_no, "transcript has no words");
    std::vector<std::string> words(f.begin() + 1, f.end());
    out.push_back({std::string(f[0]), std::move(words)});
  }
  return out;
}

void WriteTranscripts(std::ostream &os, const TranscriptList &transcripts) {
  for (const auto &[utt, words] : transcripts) {
    os << utt;
    for (size_t i = 0; i < words.size(); ++i) os << (i ? ' ' : '\t') << words[i];
    os << '\n';
  }
}

void WriteDurationCorpus(std::ostream &os, const DurationCorpus &corpus, const PhoneSet &phones) {
  for (const auto &[utt, s] : corpus) {
    os << utt << '\t';
    for (size_t i = 0; i < s.phones.size(); ++i) os << (i ? " " : "") << phones.label(s.phones[i]);
    os << '\t';
    for (size_t i = 0; i < s.durations.size(); ++i)
      os << (i ? " " : "") << FormatDouble(s.durations[i]);
    os << '\n';
  }
}

DurationCorpus ReadDurationCorpus(std::istream &is, const PhoneSet &phones) {
  DurationCorpus out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto f = SplitTabs(line);
    if (f.size() != 3) throw LineError(line_no, "expected utt<TAB>phones<TAB>durations");
    std::vector<PhoneIndex> ph;
    for (auto label : SplitWhitespace(f[1])) {
      const auto p = phones.find(label);
      if (!p) throw LineError(line_no, "unknown phone '" + std::string(label) + "'");
      ph.push_back(*p);
    }
    std::vector<double> dur;
    for (auto v : SplitWhitespace(f[2])) dur.push_back(ParseDouble(v, line_no));
    try {
      out.push_back({std::string(f[0]), DurationSample::FromDurations(std::move(ph), std::move(dur))});
    } catch (const DataError &e) {
      throw LineError(line_no, e.what());
    }
  }
  return out;
}

std::string ReportsToJson(const std::vector<ScoreReport> &reports, const PhoneSet &phones) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  auto opt = [](const std::optional<double> &v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  for (const auto &r : reports) {
    nlohmann::ordered_json j;
    j["utterance"] = r.utterance_id;
    j["variant"] = r.variant;
    j["sentence_score"] = r.sentence_score;
    auto &per = j["phones"] = nlohmann::ordered_json::array();
    for (const auto &p : r.per_phone) {
      per.push_back({{"phone", phones.label(p.phone)},
                     {"start", p.segment.start},
                     {"frames", p.segment.length},
                     {"gop", p.gop},
                     {"center_gop", p.center_gop},
                     {"tascore", p.tascore},
                     {"delta", opt(p.delta)},
                     {"cagop", opt(p.cagop)},
                     {"score", p.score},
                     {"mispronounced", p.detected_mispronounced}});
    }
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::vector<ScoreReport> ReportsFromJson(const std::string &json, const PhoneSet &phones) {
  std::vector<ScoreReport> out;
  try {
    const auto arr = nlohmann::json::parse(json);
    if (!arr.is_array()) throw DataError("score report JSON must be an array");
    auto opt = [](const nlohmann::json &v) -> std::optional<double> {
      if (v.is_null()) return std::nullopt;
      return v.get<double>();
    };
    for (const auto &j : arr) {
      ScoreReport r;
      r.utterance_id = j.at("utterance").get<std::string>();
      r.variant = j.at("variant").get<std::string>();
      r.sentence_score = j.at("sentence_score").get<double>();
      for (const auto &p : j.at("phones")) {
        PhoneScore ps;
        ps.phone = phones.index(p.at("phone").get<std::string>());
        ps.segment = {ps.phone, p.at("start").get<int64_t>(), p.at("frames").get<int64_t>()};
        ps.gop = p.at("gop").get<double>();
        ps.center_gop = p.at("center_gop").get<double>();
        ps.tascore = p.at("tascore").get<double>();
        ps.delta = opt(p.at("delta"));
        ps.cagop = opt(p.at("cagop"));
        ps.score = p.at("score").get<double>();
        ps.detected_mispronounced = p.at("mispronounced").get<bool>();
        r.per_phone.push_back(ps);
      }
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("malformed score report JSON: ") + e.what());
  }
  return out;
}

std::string ReadFile(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void WriteFile(const std::string &path, const std::string &contents) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os << contents;
  if (!os) throw DataError("failed writing " + path);
}

}  // namespace cagop
