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
// cagop: pronunciation scoring tools.
//
//   cagop synth-corpus --seed 7 --out corpus
//   cagop train-dur --train corpus/durations_train.tsv
//       --valid corpus/durations_valid.tsv --phones corpus/phones.txt
//       --checkpoint dur.ckpt
//   cagop score --posteriors corpus/post --phones corpus/phones.txt
//       --lexicon corpus/lexicon.txt --text corpus/text.txt
//       --checkpoint dur.ckpt --balance balance.tsv --variant cagop --out report.json
//
// Exit status: 0 success, 1 usage error, 2 data or format error, 3 numeric
// failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cagop/aligner.h"
#include "cagop/core.h"
#include "cagop/detector.h"
#include "cagop/duration_factor.h"
#include "cagop/duration_net.h"
#include "cagop/gop.h"
#include "cagop/io.h"
#include "cagop/metrics.h"
#include "cagop/synth.h"
#include "cagop/text_util.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace cagop {
namespace {

template <typename T, typename Reader>
T ReadWith(const std::string &path, Reader reader) {
  std::istringstream is(ReadFile(path));
  try {
    return reader(is);
  } catch (const DataError &e) {
    throw DataError(path + ": " + e.what());
  }
}

PhoneSet LoadPhones(const std::string &path) {
  return ReadWith<PhoneSet>(path, [](std::istream &is) { return ReadPhoneSet(is); });
}

// Output goes to `path`, or stdout when it is empty or "-".
void Emit(const std::string &path, const std::string &contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
    std::cout.flush();
  } else {
    WriteFile(path, contents);
  }
}

// An utterance's posteriorgram under `dir`: <utt>.cagpg, else <utt>.txt.
Posteriorgram LoadUtterancePosteriors(const std::string &dir, const std::string &utt,
                                      const PhoneSet &phones) {
  for (const char *ext : {".cagpg", ".txt"}) {
    const fs::path p = fs::path(dir) / (utt + ext);
    if (fs::exists(p)) {
      Posteriorgram pg = LoadPosteriorgram(p.string());
      try {
        return ValidatePosteriorgram(std::move(pg), phones);
      } catch (const DataError &e) {
        throw DataError(p.string() + ": " + e.what());
      }
    }
  }
  throw DataError("no posteriorgram for utterance '" + utt + "' in " + dir);
}

struct DurationModel {
  DurationNetConfig cfg;
  DurationNetParams params;
};

DurationModel LoadModel(const std::string &path, const PhoneSet &phones) {
  auto [cfg, params] = LoadCheckpoint(path);
  if (params.num_phones() != phones.size())
    throw DataError(path + ": checkpoint has " + std::to_string(params.num_phones()) +
                    " phones, phone set has " + std::to_string(phones.size()));
  return {cfg, std::move(params)};
}

std::vector<DurationSample> Samples(const DurationCorpus &corpus) {
  std::vector<DurationSample> out;
  for (const auto &[id, s] : corpus) out.push_back(s);
  return out;
}

// ---------------------------------------------------------------------------
// Reference phones and alignments shared by align and score.

struct AlignOptions {
  std::string posteriors, phones, lexicon, text, alignments;
  bool no_silence = false;
  int64_t min_frames = 1;
};

struct AlignedUtterance {
  std::string id;
  std::vector<PhoneIndex> reference;
  Posteriorgram pg;
  Alignment alignment;
};

std::vector<AlignedUtterance> AlignCorpus(const AlignOptions &o, const PhoneSet &phones) {
  const Lexicon lexicon =
      ReadWith<Lexicon>(o.lexicon, [&](std::istream &is) { return ReadLexicon(is, phones); });
  const TranscriptList text =
      ReadWith<TranscriptList>(o.text, [](std::istream &is) { return ReadTranscripts(is); });
  std::map<std::string, Alignment> given;
  if (!o.alignments.empty()) {
    for (auto &[utt, al] : ReadWith<AlignmentList>(
             o.alignments, [&](std::istream &is) { return ReadAlignments(is, phones); }))
      given[utt] = std::move(al);
  }
  AlignConfig cfg;
  cfg.min_segment_frames = o.min_frames;
  cfg.silence_phone = phones.silence_index();
  cfg.allow_optional_silence = cfg.silence_phone.has_value() && !o.no_silence;

  std::vector<AlignedUtterance> out;
  for (const auto &[utt, words] : text) {
    AlignedUtterance u;
    u.id = utt;
    try {
      u.reference = TextToPhones(words, lexicon);
    } catch (const DataError &e) {
      throw DataError("utterance '" + utt + "': " + e.what());
    }
    u.pg = LoadUtterancePosteriors(o.posteriors, utt, phones);
    if (!o.alignments.empty()) {
      auto it = given.find(utt);
      if (it == given.end()) throw DataError("no alignment for utterance '" + utt + "'");
      u.alignment = it->second;
      try {
        CheckAlignment(u.alignment, phones, u.reference, u.pg.num_frames());
      } catch (const DataError &e) {
        throw DataError("utterance '" + utt + "': " + e.what());
      }
    } else {
      try {
        u.alignment = Align(u.pg, u.reference, cfg);
      } catch (const DataError &e) {
        throw DataError("utterance '" + utt + "': " + e.what());
      }
    }
    out.push_back(std::move(u));
  }
  return out;
}

void AddAlignFlags(CLI::App *cmd, AlignOptions &o, bool allow_given) {
  cmd->add_option("--posteriors", o.posteriors, "Directory of <utt>.cagpg or <utt>.txt files")
      ->required();
  cmd->add_option("--phones", o.phones, "Phone set file")->required();
  cmd->add_option("--lexicon", o.lexicon, "Lexicon file")->required();
  cmd->add_option("--text", o.text, "Transcripts: utt_id followed by words")->required();
  if (allow_given)
    cmd->add_option("--alignments", o.alignments, "Use these alignments instead of aligning");
  cmd->add_flag("--no-silence", o.no_silence, "Do not insert optional silences");
  cmd->add_option("--min-frames", o.min_frames, "Minimum frames per phone")
      ->check(CLI::PositiveNumber);
}

// ---------------------------------------------------------------------------

int RunAlign(const AlignOptions &o, const std::string &out) {
  const PhoneSet phones = LoadPhones(o.phones);
  AlignmentList list;
  for (auto &u : AlignCorpus(o, phones)) list.push_back({u.id, std::move(u.alignment)});
  std::ostringstream os;
  WriteAlignments(os, list, phones);
  Emit(out, os.str());
  return 0;
}

struct ScoreOptions {
  AlignOptions align;
  std::string variant = "cagop", checkpoint, balance, thresholds, out;
  double beta = 0.1;
  bool clamp_delta = false;
};

int RunScore(const ScoreOptions &o) {
  const PhoneSet phones = LoadPhones(o.align.phones);
  DetectorConfig cfg;
  cfg.variant = ParseVariant(o.variant);
  cfg.beta = o.beta;
  cfg.clamp_delta_at_zero = o.clamp_delta;
  if (o.checkpoint.empty() != o.balance.empty())
    throw UsageError("--checkpoint and --balance go together");
  std::optional<DurationModel> model;
  std::optional<BalanceTable> balance;
  if (!o.checkpoint.empty()) {
    model = LoadModel(o.checkpoint, phones);
    balance = ReadWith<BalanceTable>(
        o.balance, [&](std::istream &is) { return ReadBalanceTable(is, phones); });
  }
  std::optional<ThresholdTable> thresholds;
  if (!o.thresholds.empty())
    thresholds = ReadWith<ThresholdTable>(
        o.thresholds, [&](std::istream &is) { return ReadThresholds(is, phones); });

  std::vector<ScoreReport> reports;
  for (const auto &u : AlignCorpus(o.align, phones)) {
    ScoringInputs in;
    in.utterance_id = u.id;
    in.posteriorgram = &u.pg;
    in.phone_set = &phones;
    in.reference_phones = u.reference;
    in.alignment = u.alignment;
    if (model) {
      const double speed = UtteranceSpeed(u.alignment, phones);
      in.predicted_durations = PredictDurations(model->params, model->cfg, u.reference, speed);
      in.balance = &*balance;
    }
    ScoreReport r = ScoreUtterance(in, cfg);
    if (thresholds) ApplyDetection(r, *thresholds);
    reports.push_back(std::move(r));
  }
  Emit(o.out, ReportsToJson(reports, phones));
  return 0;
}

struct TrainOptionsCli {
  std::string train, valid, phones, checkpoint, log;
  uint64_t seed = 1;
  std::optional<int> epochs, batch;
  std::optional<int64_t> warmup;
  std::optional<double> lr_scale;
  bool full_size = false;
};

int RunTrain(const TrainOptionsCli &o) {
  const PhoneSet phones = LoadPhones(o.phones);
  auto read_corpus = [&](const std::string &path) {
    return ReadWith<DurationCorpus>(path,
                                    [&](std::istream &is) { return ReadDurationCorpus(is, phones); });
  };
  const auto train = Samples(read_corpus(o.train));
  const auto valid = o.valid.empty() ? std::vector<DurationSample>{} : Samples(read_corpus(o.valid));
  DurationNetConfig cfg = o.full_size ? DurationNetConfig::FullSize() : DurationNetConfig::Desk();
  cfg.seed = o.seed;
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.batch) cfg.batch_size = *o.batch;
  if (o.warmup) cfg.warmup_steps = *o.warmup;
  if (o.lr_scale) cfg.lr_scale = *o.lr_scale;
  cfg.Validate();

  std::ostringstream log;
  log << "epoch\ttrain_l1\tvalid_mae\n";
  TrainOptions options;
  options.on_epoch = [&](const EpochLog &e) {
    log << FormatEpochLog(e) << '\n';
    std::cerr << FormatEpochLog(e) << '\n';
  };
  const TrainResult result = Train(phones.size(), train, cfg, valid, options);
  SaveCheckpoint(o.checkpoint, cfg, result.params);
  if (!o.log.empty()) WriteFile(o.log, log.str());
  std::cerr << "best epoch " << result.best_epoch << ", "
            << FormatDouble(result.log[result.best_epoch - 1].validation_mae) << " frames\n";
  return 0;
}

int RunPredict(const std::string &checkpoint, const std::string &phones_path,
               const std::string &input, const std::string &out) {
  const PhoneSet phones = LoadPhones(phones_path);
  const DurationModel model = LoadModel(checkpoint, phones);
  const auto corpus = ReadWith<DurationCorpus>(
      input, [&](std::istream &is) { return ReadDurationCorpus(is, phones); });
  std::ostringstream os;
  std::vector<double> all_pred, all_truth;
  for (const auto &[utt, s] : corpus) {
    const auto pred = PredictDurations(model.params, model.cfg, s.phones, s.speed);
    os << utt << '\t';
    for (size_t i = 0; i < pred.size(); ++i) os << (i ? " " : "") << FormatDouble(pred[i]);
    os << '\n';
    all_pred.insert(all_pred.end(), pred.begin(), pred.end());
    all_truth.insert(all_truth.end(), s.durations.begin(), s.durations.end());
  }
  Emit(out, os.str());
  if (!all_pred.empty())
    std::cerr << "mae_ms\t" << FormatDouble(Mae(all_pred, all_truth, kDefaultFrameShiftMs))
              << '\n';
  return 0;
}

int RunFitBalance(const std::string &checkpoint, const std::string &phones_path,
                  const std::string &input, const BalanceFitOptions &opts, const std::string &out) {
  const PhoneSet phones = LoadPhones(phones_path);
  const DurationModel model = LoadModel(checkpoint, phones);
  const auto corpus = ReadWith<DurationCorpus>(
      input, [&](std::istream &is) { return ReadDurationCorpus(is, phones); });
  std::vector<DurationRecord> records;
  for (const auto &[utt, s] : corpus)
    records.push_back(
        {s.phones, s.durations, PredictDurations(model.params, model.cfg, s.phones, s.speed), s.speed});
  std::ostringstream os;
  WriteBalanceTable(os, FitBalanceTable(records, opts), phones);
  Emit(out, os.str());
  return 0;
}

// Per-phone labels of each report, in report order.
std::vector<LabeledScore> Labeled(const std::vector<ScoreReport> &reports,
                                  const Annotations &ann) {
  std::vector<LabeledScore> out;
  for (const auto &r : reports) {
    auto it = ann.phone_labels.find(r.utterance_id);
    if (it == ann.phone_labels.end())
      throw DataError("no phone labels for utterance '" + r.utterance_id + "'");
    if (it->second.size() != r.per_phone.size())
      throw DataError("utterance '" + r.utterance_id + "' has " +
                      std::to_string(it->second.size()) + " labels for " +
                      std::to_string(r.per_phone.size()) + " phones");
    for (size_t i = 0; i < r.per_phone.size(); ++i) {
      auto label = it->second.find(i);
      if (label == it->second.end())
        throw DataError("utterance '" + r.utterance_id + "' lacks a label at " + std::to_string(i));
      out.push_back({r.per_phone[i].phone, r.per_phone[i].score, label->second});
    }
  }
  return out;
}

std::vector<ScoreReport> LoadReports(const std::string &path, const PhoneSet &phones) {
  return ReportsFromJson(ReadFile(path), phones);
}

Annotations LoadAnnotations(const std::string &path) {
  return ReadWith<Annotations>(path, [](std::istream &is) { return ReadAnnotations(is); });
}

int RunCalibrate(const std::string &reports_path, const std::string &annotations,
                 const std::string &phones_path, size_t min_count, const std::string &out) {
  const PhoneSet phones = LoadPhones(phones_path);
  const auto reports = LoadReports(reports_path, phones);
  CalibrationOptions opts;
  opts.min_count = min_count;
  std::ostringstream os;
  WriteThresholds(os, CalibrateThresholds(Labeled(reports, LoadAnnotations(annotations)), opts),
                  phones);
  Emit(out, os.str());
  return 0;
}

int RunEvaluate(const std::string &reports_path, const std::string &annotations,
                const std::string &phones_path, const std::string &thresholds_path,
                const std::string &out, const std::string &json_out) {
  const PhoneSet phones = LoadPhones(phones_path);
  auto reports = LoadReports(reports_path, phones);
  const Annotations ann = LoadAnnotations(annotations);
  nlohmann::ordered_json doc;
  std::ostringstream os;
  auto put = [&](const std::string &key, double value) {
    os << key << '\t' << FormatDouble(value) << '\n';
    doc[key] = value;
  };
  if (!thresholds_path.empty()) {
    const ThresholdTable t = ReadWith<ThresholdTable>(
        thresholds_path, [&](std::istream &is) { return ReadThresholds(is, phones); });
    ConfusionCounts c;
    const auto labeled = Labeled(reports, ann);
    for (const auto &s : labeled) c.Add(s.score < t.For(s.phone), s.mispronounced);
    put("phones", static_cast<double>(c.total()));
    put("tp", static_cast<double>(c.tp));
    put("fp", static_cast<double>(c.fp));
    put("fn", static_cast<double>(c.fn));
    put("tn", static_cast<double>(c.tn));
    put("accuracy", Accuracy(c));
    put("f1", F1(c));
  }
  // Sentence level: machine scores against every rater who scored all
  // utterances.
  std::map<std::string, std::vector<double>> by_rater;
  std::vector<double> machine;
  for (const auto &r : reports) {
    auto it = ann.sentence_scores.find(r.utterance_id);
    if (it == ann.sentence_scores.end()) continue;
    machine.push_back(r.sentence_score);
    for (const auto &[rater, score] : it->second) by_rater[rater].push_back(score);
  }
  std::vector<std::vector<double>> raters;
  for (auto &[rater, scores] : by_rater)
    if (scores.size() == machine.size()) raters.push_back(std::move(scores));
  if (!raters.empty() && machine.size() >= 2) {
    put("utterances", static_cast<double>(machine.size()));
    put("raters", static_cast<double>(raters.size()));
    put("pcc", MeanRaterCorrelation(machine, raters, CorrelationKind::kPearson));
    put("scc", MeanRaterCorrelation(machine, raters, CorrelationKind::kSpearman));
  }
  if (thresholds_path.empty() && raters.empty())
    throw UsageError("nothing to evaluate: give --thresholds or sentence scores");
  Emit(out, os.str());
  if (!json_out.empty()) WriteFile(json_out, doc.dump(2) + "\n");
  return 0;
}

int RunEntropyDump(const std::string &posteriors, const std::string &phones_path,
                   const std::string &out) {
  const PhoneSet phones = LoadPhones(phones_path);
  Posteriorgram pg = LoadPosteriorgram(posteriors);
  try {
    pg = ValidatePosteriorgram(std::move(pg), phones);
  } catch (const DataError &e) {
    throw DataError(posteriors + ": " + e.what());
  }
  std::ostringstream os;
  os << "frame,entropy\n";
  const auto profile = EntropyProfile(pg);
  for (size_t t = 0; t < profile.size(); ++t) os << t << ',' << FormatDouble(profile[t]) << '\n';
  Emit(out, os.str());
  return 0;
}

int Main(int argc, char **argv) {
  CLI::App app{"Context-aware goodness of pronunciation scoring"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every command");

  std::string out;
  AlignOptions align_opts;
  auto *align = app.add_subcommand("align", "Force-align transcripts to posteriorgrams");
  AddAlignFlags(align, align_opts, false);
  align->add_option("--out", out, "Alignment file (default stdout)");

  ScoreOptions score_opts;
  auto *score = app.add_subcommand("score", "Score every phone and write JSON reports");
  AddAlignFlags(score, score_opts.align, true);
  score->add_option("--variant", score_opts.variant,
                    "gop, center_gop, cagop, cagop_minus_dur or cagop_minus_ta")
      ->capture_default_str();
  score->add_option("--beta", score_opts.beta, "Duration factor weight")->capture_default_str();
  score->add_option("--checkpoint", score_opts.checkpoint, "Duration model checkpoint");
  score->add_option("--balance", score_opts.balance, "Balance table");
  score->add_option("--thresholds", score_opts.thresholds, "Thresholds used to flag phones");
  score->add_flag("--clamp-delta", score_opts.clamp_delta, "Use max(delta, 0)");
  score->add_option("--out", score_opts.out, "Report file (default stdout)");

  TrainOptionsCli train_opts;
  auto *train = app.add_subcommand("train-dur", "Train the duration model");
  train->add_option("--train", train_opts.train, "Training duration corpus")->required();
  train->add_option("--valid", train_opts.valid, "Validation duration corpus");
  train->add_option("--phones", train_opts.phones, "Phone set file")->required();
  train->add_option("--checkpoint", train_opts.checkpoint, "Output checkpoint")->required();
  train->add_option("--seed", train_opts.seed, "Random seed")->capture_default_str();
  train->add_option("--epochs", train_opts.epochs, "Override the epoch count");
  train->add_option("--batch", train_opts.batch, "Override the batch size");
  train->add_option("--warmup", train_opts.warmup, "Override the warmup steps");
  train->add_option("--lr-scale", train_opts.lr_scale, "Override the learning rate scale");
  train->add_flag("--full-size", train_opts.full_size, "Use the full-size model configuration");
  train->add_option("--log", train_opts.log, "Write the epoch log here");

  std::string checkpoint, phones, input;
  auto *predict = app.add_subcommand("predict-dur", "Predict phone durations");
  predict->add_option("--checkpoint", checkpoint, "Duration model checkpoint")->required();
  predict->add_option("--phones", phones, "Phone set file")->required();
  predict->add_option("--input", input, "Duration corpus giving phones and speeds")->required();
  predict->add_option("--out", out, "Prediction file (default stdout)");

  BalanceFitOptions balance_opts;
  auto *fit = app.add_subcommand("fit-balance", "Fit duration tolerances");
  fit->add_option("--checkpoint", checkpoint, "Duration model checkpoint")->required();
  fit->add_option("--phones", phones, "Phone set file")->required();
  fit->add_option("--input", input, "Duration corpus with aligned durations")->required();
  fit->add_option("--bucket-width", balance_opts.bucket_width, "Speed bucket width in frames")
      ->capture_default_str();
  fit->add_option("--min-count", balance_opts.min_count, "Observations needed per cell")
      ->capture_default_str();
  fit->add_option("--out", out, "Balance table (default stdout)");

  std::string reports, annotations, thresholds, json_out;
  size_t min_count = CalibrationOptions{}.min_count;
  auto *calibrate = app.add_subcommand("calibrate", "Fit per-phone detection thresholds");
  calibrate->add_option("--reports", reports, "Score reports (JSON)")->required();
  calibrate->add_option("--annotations", annotations, "Annotation file")->required();
  calibrate->add_option("--phones", phones, "Phone set file")->required();
  calibrate->add_option("--min-count", min_count, "Instances needed per phone")
      ->capture_default_str();
  calibrate->add_option("--out", out, "Threshold file (default stdout)");

  auto *evaluate = app.add_subcommand("evaluate", "Detection and sentence-level metrics");
  evaluate->add_option("--reports", reports, "Score reports (JSON)")->required();
  evaluate->add_option("--annotations", annotations, "Annotation file")->required();
  evaluate->add_option("--phones", phones, "Phone set file")->required();
  evaluate->add_option("--thresholds", thresholds, "Threshold file");
  evaluate->add_option("--out", out, "Metric lines (default stdout)");
  evaluate->add_option("--json", json_out, "Also write metrics as JSON");

  std::string posteriors;
  auto *entropy = app.add_subcommand("entropy-dump", "Per-frame posterior entropy as CSV");
  entropy->add_option("--posteriors", posteriors, "Posteriorgram file")->required();
  entropy->add_option("--phones", phones, "Phone set file")->required();
  entropy->add_option("--out", out, "CSV file (default stdout)");

  SynthConfig synth_cfg;
  auto *synth = app.add_subcommand("synth-corpus", "Generate a synthetic corpus");
  synth->add_option("--seed", synth_cfg.seed, "Random seed")->capture_default_str();
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("--utterances", synth_cfg.num_utterances, "Utterance count")
      ->capture_default_str();
  synth->add_option("--error-rate", synth_cfg.error_rate, "Mean per-phone error rate")
      ->capture_default_str();
  synth->add_option("--native-train", synth_cfg.native_train, "Training duration sequences")
      ->capture_default_str();
  synth->add_option("--native-valid", synth_cfg.native_valid, "Validation duration sequences")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*align) return RunAlign(align_opts, out);
  if (*score) return RunScore(score_opts);
  if (*train) return RunTrain(train_opts);
  if (*predict) return RunPredict(checkpoint, phones, input, out);
  if (*fit) return RunFitBalance(checkpoint, phones, input, balance_opts, out);
  if (*calibrate) return RunCalibrate(reports, annotations, phones, min_count, out);
  if (*evaluate) return RunEvaluate(reports, annotations, phones, thresholds, out, json_out);
  if (*entropy) return RunEntropyDump(posteriors, phones, out);
  if (*synth) {
    WriteCorpus(out, GenerateCorpus(synth_cfg));
    return 0;
  }
  return 1;
}

}  // namespace
}  // namespace cagop

int main(int argc, char **argv) {
  try {
    return cagop::Main(argc, argv);
  } catch (const cagop::UsageError &e) {
    std::cerr << "cagop: " << e.what() << '\n';
    return 1;
  } catch (const cagop::NumericError &e) {
    std::cerr << "cagop: " << e.what() << '\n';
    return 3;
  } catch (const std::exception &e) {
    std::cerr << "cagop: " << e.what() << '\n';
    return 2;
  }
}
