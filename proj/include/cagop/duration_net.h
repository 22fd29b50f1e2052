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

#ifndef CAGOP_DURATION_NET_H_
#define CAGOP_DURATION_NET_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cagop/core.h"

namespace cagop {

// Self-attention phone duration model. Input is a phone index sequence plus
// the utterance speed (mean phone duration in frames); output is one duration
// in frames per phone. Encoder blocks are post-norm: multi-head attention
// whose logits carry a per-head local Gaussian bias -(j-k)^2 / sigma^2, then a
// ReLU feed-forward layer.

struct DurationNetConfig {
  int embed_dim = 256;
  int num_blocks = 6;
  int num_heads = 4;
  int ffn_dim = 1024;
  double dropout_rate = 0.1;
  int max_seq_len = 100;
  double lr_scale = 0.001;
  int64_t warmup_steps = 25000;
  int batch_size = 64;
  int epochs = 100;
  uint64_t seed = 0;
  double initial_sigma = 4.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.98;
  double adam_epsilon = 1e-9;
  double layer_norm_epsilon = 1e-6;

  static DurationNetConfig FullSize() { return {}; }
  /// Scaled-down configuration used for tests and synthetic experiments.
  static DurationNetConfig Desk();

  /// Throws UsageError on inconsistent values.
  void Validate() const;
  int head_dim() const { return embed_dim / num_heads; }

  bool operator==(const DurationNetConfig &) const = default;
};

struct EncoderBlockParams {
  RowMatrix query, key, value, output;       // d x d
  RowMatrix ffn_in, ffn_in_bias;             // d x f, 1 x f
  RowMatrix ffn_out, ffn_out_bias;           // f x d, 1 x d
  RowMatrix norm1_gain, norm1_bias;          // 1 x d
  RowMatrix norm2_gain, norm2_bias;          // 1 x d
  RowMatrix log_sigma;                       // 1 x heads
};

/// Also used for gradients, which mirror the parameter layout exactly.
struct DurationNetParams {
  RowMatrix phone_embeddings;  // |A| x d
  RowMatrix speed_projection;  // 1 x d
  std::vector<EncoderBlockParams> blocks;
  RowMatrix output_weight;  // d x 1
  RowMatrix output_bias;    // 1 x 1

  /// All-zero tensors with the shapes implied by `cfg`.
  static DurationNetParams Zeros(size_t num_phones, const DurationNetConfig &cfg);

  size_t num_phones() const { return static_cast<size_t>(phone_embeddings.rows()); }

  /// Visits every tensor in declaration order (the checkpoint order).
  template <typename Fn>
  void ForEachTensor(Fn &&fn) {
    fn("phone_embeddings", phone_embeddings);
    fn("speed_projection", speed_projection);
    for (auto &b : blocks) {
      fn("query", b.query);
      fn("key", b.key);
      fn("value", b.value);
      fn("output", b.output);
      fn("ffn_in", b.ffn_in);
      fn("ffn_in_bias", b.ffn_in_bias);
      fn("ffn_out", b.ffn_out);
      fn("ffn_out_bias", b.ffn_out_bias);
      fn("norm1_gain", b.norm1_gain);
      fn("norm1_bias", b.norm1_bias);
      fn("norm2_gain", b.norm2_gain);
      fn("norm2_bias", b.norm2_bias);
      fn("log_sigma", b.log_sigma);
    }
    fn("output_weight", output_weight);
    fn("output_bias", output_bias);
  }
  template <typename Fn>
  void ForEachTensor(Fn &&fn) const {
    const_cast<DurationNetParams *>(this)->ForEachTensor(
        [&](const char *name, RowMatrix &m) { fn(name, static_cast<const RowMatrix &>(m)); });
  }

  size_t NumScalars() const;
  bool operator==(const DurationNetParams &other) const;
};

struct DurationSample {
  std::vector<PhoneIndex> phones;
  std::vector<double> durations;  // frames
  double speed = 0.0;             // mean of durations

  /// Builds a sample with speed set to the mean duration.
  static DurationSample FromDurations(std::vector<PhoneIndex> phones,
                                      std::vector<double> durations);
};

enum class Mode { kTrain, kEval };

/// Deterministic generator used for initialization, shuffling and dropout.
using Rng = std::mt19937_64;

/// T x T matrix with entries -(j-k)^2 / sigma^2.
RowMatrix GaussianBias(int length, double sigma);

/// softmax(q k^T / sqrt(d_h) + bias) v, with d_h = q.cols().
RowMatrix Attention(const RowMatrix &q, const RowMatrix &k, const RowMatrix &v,
                    const RowMatrix &bias);

/// Row-wise softmax; entries of -inf receive exactly zero weight.
RowMatrix RowSoftmax(const RowMatrix &logits);

/// Standard sinusoidal position table, `length` x `dim`.
RowMatrix PositionalEncoding(int length, int dim);

/// Glorot-uniform matrices, unit norm gains, zero biases, log sigma at
/// cfg.initial_sigma.
DurationNetParams InitParams(size_t num_phones, const DurationNetConfig &cfg, Rng &rng);

/// Per-phone predictions. `padded_length`, when larger than the sequence,
/// appends masked positions that the real tokens never attend to. `rng` is
/// only consumed in train mode (dropout) and may be null in eval mode.
std::vector<double> Forward(const DurationNetParams &params, const DurationNetConfig &cfg,
                            const std::vector<PhoneIndex> &phones, double speed, Mode mode,
                            Rng *rng, int padded_length = 0);

double L1Loss(const std::vector<double> &pred, const std::vector<double> &target);

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> predictions;
  DurationNetParams gradient;
};

/// Train-mode forward pass plus exact reverse-mode gradient of L1Loss.
LossAndGradient Backward(const DurationNetParams &params, const DurationNetConfig &cfg,
                         const DurationSample &sample, Rng &rng, int padded_length = 0);

/// lr_scale * d^-0.5 * min(step^-0.5, step * warmup^-1.5).
double NoamLr(int64_t step, const DurationNetConfig &cfg);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_mae = 0.0;  // frames

  bool operator==(const EpochLog &) const = default;
};

struct TrainOptions {
  // Stops after this many optimizer steps when set.
  std::optional<int64_t> max_steps;
  std::function<void(const EpochLog &)> on_epoch;
};

struct TrainResult {
  DurationNetParams params;  // best validation MAE
  std::vector<EpochLog> log;
  int best_epoch = 0;
  int64_t steps = 0;
};

/// Mini-batch Adam under the Noam schedule. Batches are padded to their
/// longest sequence and masked. Deterministic for a given cfg.seed. When
/// `validation` is empty the training set is used for model selection.
TrainResult Train(size_t num_phones, const std::vector<DurationSample> &dataset,
                  const DurationNetConfig &cfg, const std::vector<DurationSample> &validation,
                  const TrainOptions &options = {});

/// Eval-mode forward with predictions clamped to at least one frame.
std::vector<double> PredictDurations(const DurationNetParams &params,
                                     const DurationNetConfig &cfg,
                                     const std::vector<PhoneIndex> &phones, double speed);

/// Mean absolute error in frames of PredictDurations over a sample set.
double ValidationMae(const DurationNetParams &params, const DurationNetConfig &cfg,
                     const std::vector<DurationSample> &samples);

void WriteCheckpoint(std::ostream &os, const DurationNetConfig &cfg,
                     const DurationNetParams &params);
/// Throws DataError on a bad magic, truncated data or inconsistent shapes.
std::pair<DurationNetConfig, DurationNetParams> ReadCheckpoint(std::istream &is);

void SaveCheckpoint(const std::string &path, const DurationNetConfig &cfg,
                    const DurationNetParams &params);
std::pair<DurationNetConfig, DurationNetParams> LoadCheckpoint(const std::string &path);

std::string FormatEpochLog(const EpochLog &entry);

}  // namespace cagop

#endif  // CAGOP_DURATION_NET_H_
