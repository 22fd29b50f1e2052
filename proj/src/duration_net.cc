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

#include "cagop/duration_net.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace cagop {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kSubnormalExp = -700.0;
using RowVector = Eigen::RowVectorXd;

double Uniform01(Rng &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void GlorotUniform(RowMatrix &m, Rng &rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = (2.0 * Uniform01(rng) - 1.0) * limit;
}

RowMatrix DropoutMask(Eigen::Index rows, Eigen::Index cols, double rate, Rng &rng) {
  RowMatrix mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    mask.data()[i] = Uniform01(rng) < rate ? 0.0 : keep_scale;
  return mask;
}

struct NormCache {
  RowMatrix normalized;
  Eigen::VectorXd inv_std;
};

RowMatrix LayerNormForward(const RowMatrix &x, const RowMatrix &gain, const RowMatrix &bias,
                           double eps, NormCache *cache) {
  const Eigen::Index d = x.cols();
  RowMatrix xhat(x.rows(), d);
  Eigen::VectorXd inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const RowVector centered = x.row(r).array() - mean;
    const double var = centered.squaredNorm() / static_cast<double>(d);
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = centered * inv_std(r);
  }
  RowMatrix y = (xhat.array().rowwise() * gain.row(0).array()).rowwise() + bias.row(0).array();
  if (cache) {
    cache->normalized = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

// Accumulates gain/bias gradients and returns the input gradient.
RowMatrix LayerNormBackward(const RowMatrix &dy, const NormCache &cache, const RowMatrix &gain,
                            RowMatrix &dgain, RowMatrix &dbias) {
  const RowMatrix &xhat = cache.normalized;
  dgain.row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
  dbias.row(0) += dy.colwise().sum();
  const RowMatrix dxhat = dy.array().rowwise() * gain.row(0).array();
  RowMatrix dx(dy.rows(), dy.cols());
  const double inv_d = 1.0 / static_cast<double>(dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_dxhat = dxhat.row(r).sum() * inv_d;
    const double mean_dxhat_xhat = dxhat.row(r).dot(xhat.row(r)) * inv_d;
    dx.row(r) = cache.inv_std(r) *
                (dxhat.row(r).array() - mean_dxhat - xhat.row(r).array() * mean_dxhat_xhat).matrix();
  }
  return dx;
}

struct BlockCache {
  RowMatrix input;
  RowMatrix q, k, v;
  std::vector<RowMatrix> weights;   // per-head attention probabilities
  std::vector<RowMatrix> gaussian;  // per-head Gaussian bias
  RowMatrix context;                // concatenated head outputs
  RowMatrix drop_attn;
  NormCache norm1;
  RowMatrix norm1_out;
  RowMatrix hidden_pre;
  RowMatrix hidden;
  RowMatrix drop_ffn;
  NormCache norm2;
};

struct ForwardCache {
  int length = 0;
  int valid = 0;
  RowMatrix drop_input;
  std::vector<BlockCache> blocks;
  RowMatrix final_hidden;
};

void CheckInputs(const DurationNetParams &params, const DurationNetConfig &cfg,
                 const std::vector<PhoneIndex> &phones) {
  if (phones.empty()) throw DataError("duration model input is empty");
  if (static_cast<int>(phones.size()) > cfg.max_seq_len)
    throw DataError("sequence of length " + std::to_string(phones.size()) +
                    " exceeds max_seq_len " + std::to_string(cfg.max_seq_len));
  for (PhoneIndex p : phones)
    if (p < 0 || static_cast<size_t>(p) >= params.num_phones())
      throw DataError("phone index " + std::to_string(p) + " outside the model vocabulary");
}

// Runs the network on `phones` padded to `padded_length`; returns one value
// per (padded) position.
Eigen::VectorXd RunForward(const DurationNetParams &params, const DurationNetConfig &cfg,
                           const std::vector<PhoneIndex> &phones, double speed, Mode mode,
                           Rng *rng, int padded_length, ForwardCache *cache) {
  CheckInputs(params, cfg, phones);
  const int valid = static_cast<int>(phones.size());
  const int length = std::max(valid, padded_length);
  if (length > cfg.max_seq_len) throw DataError("padded length exceeds max_seq_len");
  const bool dropout = mode == Mode::kTrain && cfg.dropout_rate > 0.0;
  if (dropout && rng == nullptr) throw UsageError("train mode requires a random generator");
  const int d = cfg.embed_dim;
  const int heads = cfg.num_heads;
  const int dh = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  RowMatrix x = PositionalEncoding(length, d);
  for (int t = 0; t < length; ++t) {
    const PhoneIndex p = t < valid ? phones[t] : 0;
    x.row(t) += params.phone_embeddings.row(p) + speed * params.speed_projection.row(0);
  }
  if (dropout) {
    RowMatrix mask = DropoutMask(length, d, cfg.dropout_rate, *rng);
    x.array() *= mask.array();
    if (cache) cache->drop_input = std::move(mask);
  }

  RowMatrix key_mask = RowMatrix::Zero(length, length);
  if (length > valid) key_mask.rightCols(length - valid).setConstant(kNegInf);

  if (cache) {
    cache->length = length;
    cache->valid = valid;
    cache->blocks.assign(params.blocks.size(), {});
  }
  for (size_t b = 0; b < params.blocks.size(); ++b) {
    const EncoderBlockParams &blk = params.blocks[b];
    RowMatrix q = x * blk.query;
    RowMatrix k = x * blk.key;
    RowMatrix v = x * blk.value;
    RowMatrix context(length, d);
    std::vector<RowMatrix> weights(heads), gaussian(heads);
    for (int h = 0; h < heads; ++h) {
      gaussian[h] = GaussianBias(length, std::exp(blk.log_sigma(0, h)));
      RowMatrix logits = q.middleCols(h * dh, dh) * k.middleCols(h * dh, dh).transpose() * scale;
      logits += gaussian[h] + key_mask;
      weights[h] = RowSoftmax(logits);
      context.middleCols(h * dh, dh).noalias() = weights[h] * v.middleCols(h * dh, dh);
    }
    RowMatrix attn_out = context * blk.output;
    RowMatrix drop_attn;
    if (dropout) {
      drop_attn = DropoutMask(length, d, cfg.dropout_rate, *rng);
      attn_out.array() *= drop_attn.array();
    }
    NormCache norm1;
    RowMatrix y1 = LayerNormForward(x + attn_out, blk.norm1_gain, blk.norm1_bias,
                                    cfg.layer_norm_epsilon, cache ? &norm1 : nullptr);
    RowMatrix hidden_pre = (y1 * blk.ffn_in).rowwise() + blk.ffn_in_bias.row(0);
    RowMatrix hidden = hidden_pre.cwiseMax(0.0);
    RowMatrix ffn_out = (hidden * blk.ffn_out).rowwise() + blk.ffn_out_bias.row(0);
    RowMatrix drop_ffn;
    if (dropout) {
      drop_ffn = DropoutMask(length, d, cfg.dropout_rate, *rng);
      ffn_out.array() *= drop_ffn.array();
    }
    NormCache norm2;
    RowMatrix next = LayerNormForward(y1 + ffn_out, blk.norm2_gain, blk.norm2_bias,
                                      cfg.layer_norm_epsilon, cache ? &norm2 : nullptr);
    if (cache) {
      BlockCache &c = cache->blocks[b];
      c.input = std::move(x);
      c.q = std::move(q);
      c.k = std::move(k);
      c.v = std::move(v);
      c.weights = std::move(weights);
      c.gaussian = std::move(gaussian);
      c.context = std::move(context);
      c.drop_attn = std::move(drop_attn);
      c.norm1 = std::move(norm1);
      c.norm1_out = std::move(y1);
      c.hidden_pre = std::move(hidden_pre);
      c.hidden = std::move(hidden);
      c.drop_ffn = std::move(drop_ffn);
      c.norm2 = std::move(norm2);
    }
    x = std::move(next);
  }
  Eigen::VectorXd out = x * params.output_weight.col(0);
  out.array() += params.output_bias(0, 0);
  if (cache) cache->final_hidden = std::move(x);
  return out;
}

void AddScaled(DurationNetParams &acc, const DurationNetParams &g, double scale) {
  std::vector<const RowMatrix *> src;
  g.ForEachTensor([&](const char *, const RowMatrix &m) { src.push_back(&m); });
  size_t i = 0;
  acc.ForEachTensor([&](const char *, RowMatrix &m) { m += scale * *src[i++]; });
}

// Gradient of sum_t |pred_t - target_t| * loss_scale over the valid positions.
DurationNetParams RunBackward(const DurationNetParams &params, const DurationNetConfig &cfg,
                              const DurationSample &sample, const ForwardCache &cache,
                              const Eigen::VectorXd &pred, double loss_scale) {
  const int length = cache.length;
  const int d = cfg.embed_dim;
  const int dh = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  DurationNetParams grad = DurationNetParams::Zeros(params.num_phones(), cfg);

  Eigen::VectorXd dout = Eigen::VectorXd::Zero(length);
  for (int t = 0; t < cache.valid; ++t) {
    const double diff = pred(t) - sample.durations[t];
    dout(t) = diff > 0.0 ? loss_scale : (diff < 0.0 ? -loss_scale : 0.0);
  }
  grad.output_weight.col(0) = cache.final_hidden.transpose() * dout;
  grad.output_bias(0, 0) = dout.sum();
  RowMatrix dx = dout * params.output_weight.col(0).transpose();

  for (size_t b = params.blocks.size(); b-- > 0;) {
    const EncoderBlockParams &blk = params.blocks[b];
    const BlockCache &c = cache.blocks[b];
    EncoderBlockParams &g = grad.blocks[b];

    // Feed-forward sublayer.
    RowMatrix dres2 = LayerNormBackward(dx, c.norm2, blk.norm2_gain, g.norm2_gain, g.norm2_bias);
    RowMatrix dffn = dres2;
    if (c.drop_ffn.size()) dffn.array() *= c.drop_ffn.array();
    g.ffn_out.noalias() += c.hidden.transpose() * dffn;
    g.ffn_out_bias.row(0) += dffn.colwise().sum();
    RowMatrix dhidden = dffn * blk.ffn_out.transpose();
    dhidden.array() *= (c.hidden_pre.array() > 0.0).cast<double>();
    g.ffn_in.noalias() += c.norm1_out.transpose() * dhidden;
    g.ffn_in_bias.row(0) += dhidden.colwise().sum();
    RowMatrix dy1 = dres2 + dhidden * blk.ffn_in.transpose();

    // Attention sublayer.
    RowMatrix dres1 = LayerNormBackward(dy1, c.norm1, blk.norm1_gain, g.norm1_gain, g.norm1_bias);
    RowMatrix dattn = dres1;
    if (c.drop_attn.size()) dattn.array() *= c.drop_attn.array();
    g.output.noalias() += c.context.transpose() * dattn;
    RowMatrix dcontext = dattn * blk.output.transpose();
    RowMatrix dq(length, d), dk(length, d), dv(length, d);
    for (int h = 0; h < cfg.num_heads; ++h) {
      const RowMatrix &a = c.weights[h];
      const auto dctx_h = dcontext.middleCols(h * dh, dh);
      RowMatrix da = dctx_h * c.v.middleCols(h * dh, dh).transpose();
      dv.middleCols(h * dh, dh).noalias() = a.transpose() * dctx_h;
      const Eigen::VectorXd row_dot = (da.array() * a.array()).rowwise().sum();
      RowMatrix dlogits = a.array() * (da.colwise() - row_dot).array();
      // d M / d log(sigma) = -2 M.
      g.log_sigma(0, h) += -2.0 * (dlogits.array() * c.gaussian[h].array()).sum();
      dq.middleCols(h * dh, dh).noalias() = scale * dlogits * c.k.middleCols(h * dh, dh);
      dk.middleCols(h * dh, dh).noalias() =
          scale * dlogits.transpose() * c.q.middleCols(h * dh, dh);
    }
    g.query.noalias() += c.input.transpose() * dq;
    g.key.noalias() += c.input.transpose() * dk;
    g.value.noalias() += c.input.transpose() * dv;
    dx = dres1;
    dx.noalias() += dq * blk.query.transpose();
    dx.noalias() += dk * blk.key.transpose();
    dx.noalias() += dv * blk.value.transpose();
  }

  if (cache.drop_input.size()) dx.array() *= cache.drop_input.array();
  for (int t = 0; t < length; ++t) {
    const PhoneIndex p = t < cache.valid ? sample.phones[t] : 0;
    grad.phone_embeddings.row(p) += dx.row(t);
  }
  grad.speed_projection.row(0) = sample.speed * dx.colwise().sum();
  return grad;
}

void CheckSample(const DurationSample &s) {
  if (s.phones.size() != s.durations.size())
    throw DataError("sample phones and durations differ in length");
}

}  // namespace

DurationNetConfig DurationNetConfig::Desk() {
  DurationNetConfig cfg;
  cfg.embed_dim = 64;
  cfg.num_blocks = 2;
  cfg.num_heads = 4;
  cfg.ffn_dim = 256;
  cfg.warmup_steps = 400;
  cfg.lr_scale = 1.0;
  cfg.batch_size = 16;
  cfg.epochs = 40;
  return cfg;
}

void DurationNetConfig::Validate() const {
  if (embed_dim < 1 || num_blocks < 1 || num_heads < 1 || ffn_dim < 1 || max_seq_len < 1 ||
      batch_size < 1 || epochs < 1 || warmup_steps < 1)
    throw UsageError("duration model dimensions must be >= 1");
  if (embed_dim % num_heads != 0)
    throw UsageError("embed_dim must be divisible by num_heads");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw UsageError("dropout_rate must lie in [0, 1)");
  if (!(lr_scale > 0.0) || !(initial_sigma > 0.0) || !(layer_norm_epsilon > 0.0))
    throw UsageError("lr_scale, initial_sigma and layer_norm_epsilon must be positive");
}

DurationNetParams DurationNetParams::Zeros(size_t num_phones, const DurationNetConfig &cfg) {
  const int d = cfg.embed_dim;
  const int f = cfg.ffn_dim;
  DurationNetParams p;
  p.phone_embeddings = RowMatrix::Zero(static_cast<Eigen::Index>(num_phones), d);
  p.speed_projection = RowMatrix::Zero(1, d);
  p.blocks.resize(cfg.num_blocks);
  for (auto &b : p.blocks) {
    b.query = b.key = b.value = b.output = RowMatrix::Zero(d, d);
    b.ffn_in = RowMatrix::Zero(d, f);
    b.ffn_in_bias = RowMatrix::Zero(1, f);
    b.ffn_out = RowMatrix::Zero(f, d);
    b.ffn_out_bias = RowMatrix::Zero(1, d);
    b.norm1_gain = b.norm1_bias = b.norm2_gain = b.norm2_bias = RowMatrix::Zero(1, d);
    b.log_sigma = RowMatrix::Zero(1, cfg.num_heads);
  }
  p.output_weight = RowMatrix::Zero(d, 1);
  p.output_bias = RowMatrix::Zero(1, 1);
  return p;
}

size_t DurationNetParams::NumScalars() const {
  size_t n = 0;
  ForEachTensor([&](const char *, const RowMatrix &m) { n += static_cast<size_t>(m.size()); });
  return n;
}

bool DurationNetParams::operator==(const DurationNetParams &other) const {
  std::vector<const RowMatrix *> mine, theirs;
  ForEachTensor([&](const char *, const RowMatrix &m) { mine.push_back(&m); });
  other.ForEachTensor([&](const char *, const RowMatrix &m) { theirs.push_back(&m); });
  if (mine.size() != theirs.size()) return false;
  for (size_t i = 0; i < mine.size(); ++i) {
    if (mine[i]->rows() != theirs[i]->rows() || mine[i]->cols() != theirs[i]->cols()) return false;
    if (*mine[i] != *theirs[i]) return false;
  }
  return true;
}

DurationSample DurationSample::FromDurations(std::vector<PhoneIndex> phones,
                                             std::vector<double> durations) {
  if (durations.empty() || phones.size() != durations.size())
    throw DataError("duration sample needs one positive duration per phone");
  for (double v : durations)
    if (!(v > 0.0)) throw DataError("durations must be positive");
  DurationSample s;
  s.speed = std::accumulate(durations.begin(), durations.end(), 0.0) /
            static_cast<double>(durations.size());
  s.phones = std::move(phones);
  s.durations = std::move(durations);
  return s;
}

RowMatrix GaussianBias(int length, double sigma) {
  RowMatrix m(length, length);
  const double inv_var = 1.0 / (sigma * sigma);
  for (int j = 0; j < length; ++j)
    for (int k = 0; k < length; ++k) {
      const double off = static_cast<double>(j - k);
      m(j, k) = -(off * off) * inv_var;
    }
  return m;
}

RowMatrix RowSoftmax(const RowMatrix &logits) {
  RowMatrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    // Weights that would underflow to subnormals are set to zero; subnormal
    // operands slow the matrix kernels down by an order of magnitude.
    const auto shifted = logits.row(r).array() - mx;
    out.row(r) = (shifted < kSubnormalExp).select(0.0, shifted.exp());
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

RowMatrix Attention(const RowMatrix &q, const RowMatrix &k, const RowMatrix &v,
                    const RowMatrix &bias) {
  if (q.cols() != k.cols() || k.rows() != v.rows() || bias.rows() != q.rows() ||
      bias.cols() != k.rows())
    throw DataError("attention operand shapes disagree");
  if (q.hasNaN() || k.hasNaN() || v.hasNaN() || bias.hasNaN())
    throw NumericError("NaN in attention inputs");
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  RowMatrix logits = q * k.transpose() * scale + bias;
  return RowSoftmax(logits) * v;
}

RowMatrix PositionalEncoding(int length, int dim) {
  RowMatrix pe(length, dim);
  for (int pos = 0; pos < length; ++pos)
    for (int i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, static_cast<double>(2 * (i / 2)) / dim);
      const double angle = static_cast<double>(pos) / rate;
      pe(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  return pe;
}

DurationNetParams InitParams(size_t num_phones, const DurationNetConfig &cfg, Rng &rng) {
  cfg.Validate();
  DurationNetParams p = DurationNetParams::Zeros(num_phones, cfg);
  GlorotUniform(p.phone_embeddings, rng);
  GlorotUniform(p.speed_projection, rng);
  for (auto &b : p.blocks) {
    GlorotUniform(b.query, rng);
    GlorotUniform(b.key, rng);
    GlorotUniform(b.value, rng);
    GlorotUniform(b.output, rng);
    GlorotUniform(b.ffn_in, rng);
    GlorotUniform(b.ffn_out, rng);
    b.norm1_gain.setOnes();
    b.norm2_gain.setOnes();
    b.log_sigma.setConstant(std::log(cfg.initial_sigma));
  }
  GlorotUniform(p.output_weight, rng);
  return p;
}

std::vector<double> Forward(const DurationNetParams &params, const DurationNetConfig &cfg,
                            const std::vector<PhoneIndex> &phones, double speed, Mode mode,
                            Rng *rng, int padded_length) {
  Eigen::VectorXd out =
      RunForward(params, cfg, phones, speed, mode, rng, padded_length, nullptr);
  return {out.data(), out.data() + phones.size()};
}

double L1Loss(const std::vector<double> &pred, const std::vector<double> &target) {
  if (pred.size() != target.size()) throw DataError("L1 loss length mismatch");
  if (pred.empty()) throw DataError("L1 loss of empty sequences");
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - target[i]);
  return sum / static_cast<double>(pred.size());
}

LossAndGradient Backward(const DurationNetParams &params, const DurationNetConfig &cfg,
                         const DurationSample &sample, Rng &rng, int padded_length) {
  CheckSample(sample);
  ForwardCache cache;
  Eigen::VectorXd pred = RunForward(params, cfg, sample.phones, sample.speed, Mode::kTrain, &rng,
                                    padded_length, &cache);
  LossAndGradient out;
  out.predictions.assign(pred.data(), pred.data() + sample.phones.size());
  out.loss = L1Loss(out.predictions, sample.durations);
  out.gradient = RunBackward(params, cfg, sample, cache, pred,
                             1.0 / static_cast<double>(sample.phones.size()));
  return out;
}

double NoamLr(int64_t step, const DurationNetConfig &cfg) {
  if (step < 1) throw UsageError("Noam schedule steps start at 1");
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(cfg.warmup_steps);
  return cfg.lr_scale / std::sqrt(static_cast<double>(cfg.embed_dim)) *
         std::min(1.0 / std::sqrt(s), s * std::pow(w, -1.5));
}

std::vector<double> PredictDurations(const DurationNetParams &params,
                                     const DurationNetConfig &cfg,
                                     const std::vector<PhoneIndex> &phones, double speed) {
  std::vector<double> out = Forward(params, cfg, phones, speed, Mode::kEval, nullptr);
  for (double &v : out) v = std::max(v, 1.0);
  return out;
}

double ValidationMae(const DurationNetParams &params, const DurationNetConfig &cfg,
                     const std::vector<DurationSample> &samples) {
  double sum = 0.0;
  size_t count = 0;
  for (const auto &s : samples) {
    const auto pred = PredictDurations(params, cfg, s.phones, s.speed);
    for (size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - s.durations[i]);
    count += pred.size();
  }
  if (count == 0) throw DataError("no samples to evaluate");
  return sum / static_cast<double>(count);
}

TrainResult Train(size_t num_phones, const std::vector<DurationSample> &dataset,
                  const DurationNetConfig &cfg, const std::vector<DurationSample> &validation,
                  const TrainOptions &options) {
  cfg.Validate();
  if (dataset.empty()) throw DataError("empty training set");
  double duration_sum = 0.0;
  size_t duration_count = 0;
  for (const auto &s : dataset) {
    CheckSample(s);
    if (s.phones.empty() || static_cast<int>(s.phones.size()) > cfg.max_seq_len)
      throw DataError("training sequence length outside [1, max_seq_len]");
    for (double v : s.durations) duration_sum += v;
    duration_count += s.durations.size();
  }
  for (const auto &s : validation) CheckSample(s);
  const std::vector<DurationSample> &selection = validation.empty() ? dataset : validation;

  Rng rng(cfg.seed);
  DurationNetParams params = InitParams(num_phones, cfg, rng);
  // Start the output at the corpus mean duration.
  params.output_bias(0, 0) = duration_sum / static_cast<double>(duration_count);

  DurationNetParams m = DurationNetParams::Zeros(num_phones, cfg);
  DurationNetParams v = DurationNetParams::Zeros(num_phones, cfg);

  TrainResult result;
  double best_mae = std::numeric_limits<double>::infinity();
  std::vector<size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), size_t{0});
  int64_t step = 0;
  bool stop = false;

  for (int epoch = 1; epoch <= cfg.epochs && !stop; ++epoch) {
    for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    double epoch_abs = 0.0;
    size_t epoch_tokens = 0;
    for (size_t begin = 0; begin < order.size() && !stop; begin += cfg.batch_size) {
      const size_t end = std::min(order.size(), begin + static_cast<size_t>(cfg.batch_size));
      size_t tokens = 0;
      int padded = 0;
      for (size_t i = begin; i < end; ++i) {
        const auto &s = dataset[order[i]];
        tokens += s.phones.size();
        padded = std::max(padded, static_cast<int>(s.phones.size()));
      }
      DurationNetParams grad = DurationNetParams::Zeros(num_phones, cfg);
      double batch_abs = 0.0;
      for (size_t i = begin; i < end; ++i) {
        const auto &s = dataset[order[i]];
        ForwardCache cache;
        Eigen::VectorXd pred =
            RunForward(params, cfg, s.phones, s.speed, Mode::kTrain, &rng, padded, &cache);
        for (size_t t = 0; t < s.phones.size(); ++t) batch_abs += std::abs(pred(t) - s.durations[t]);
        AddScaled(grad, RunBackward(params, cfg, s, cache, pred, 1.0 / static_cast<double>(tokens)),
                  1.0);
      }
      ++step;
      if (!std::isfinite(batch_abs)) {
        std::ostringstream msg;
        msg << "training diverged (non-finite loss) at step " << step;
        throw NumericError(msg.str());
      }
      epoch_abs += batch_abs;
      epoch_tokens += tokens;

      const double lr = NoamLr(step, cfg);
      const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
      std::vector<RowMatrix *> pt, mt, vt;
      std::vector<const RowMatrix *> gt;
      params.ForEachTensor([&](const char *, RowMatrix &x) { pt.push_back(&x); });
      m.ForEachTensor([&](const char *, RowMatrix &x) { mt.push_back(&x); });
      v.ForEachTensor([&](const char *, RowMatrix &x) { vt.push_back(&x); });
      grad.ForEachTensor([&](const char *, const RowMatrix &x) { gt.push_back(&x); });
      for (size_t i = 0; i < pt.size(); ++i) {
        *mt[i] = cfg.adam_beta1 * *mt[i] + (1.0 - cfg.adam_beta1) * *gt[i];
        *vt[i] = cfg.adam_beta2 * *vt[i] + (1.0 - cfg.adam_beta2) * gt[i]->cwiseAbs2();
        pt[i]->array() -= lr * (mt[i]->array() / c1) /
                          ((vt[i]->array() / c2).sqrt() + cfg.adam_epsilon);
      }
      if (options.max_steps && step >= *options.max_steps) stop = true;
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = epoch_abs / static_cast<double>(epoch_tokens);
    entry.validation_mae = ValidationMae(params, cfg, selection);
    if (!std::isfinite(entry.validation_mae)) {
      std::ostringstream msg;
      msg << "validation MAE is not finite after step " << step;
      throw NumericError(msg.str());
    }
    if (entry.validation_mae < best_mae) {
      best_mae = entry.validation_mae;
      result.params = params;
      result.best_epoch = epoch;
    }
    result.log.push_back(entry);
    if (options.on_epoch) options.on_epoch(entry);
  }
  result.steps = step;
  return result;
}

std::string FormatEpochLog(const EpochLog &entry) {
  std::ostringstream os;
  os.precision(17);
  os << entry.epoch << '\t' << entry.train_loss << '\t' << entry.validation_mae;
  return os.str();
}

// Checkpoint layout, all little-endian:
//   "CAGDUR1\0"
//   u64 num_phones
//   i64 embed_dim num_blocks num_heads ffn_dim max_seq_len warmup_steps
//       batch_size epochs seed
//   f64 dropout_rate lr_scale initial_sigma adam_beta1 adam_beta2
//       adam_epsilon layer_norm_epsilon
//   u64 tensor_count, then per tensor: u32 rank, u64 dims[rank], f64 data
//   (row-major), in DurationNetParams::ForEachTensor order.
namespace {

constexpr char kCheckpointMagic[8] = {'C', 'A', 'G', 'D', 'U', 'R', '1', '\0'};

template <typename T>
void PutLe(std::ostream &os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char *>(bytes), sizeof(T));
}

template <typename T>
T GetLe(std::istream &is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char *>(bytes), sizeof(T)))
    throw DataError("checkpoint is truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void WriteCheckpoint(std::ostream &os, const DurationNetConfig &cfg,
                     const DurationNetParams &params) {
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  PutLe<uint64_t>(os, params.num_phones());
  for (int64_t v : {int64_t{cfg.embed_dim}, int64_t{cfg.num_blocks}, int64_t{cfg.num_heads},
                    int64_t{cfg.ffn_dim}, int64_t{cfg.max_seq_len}, cfg.warmup_steps,
                    int64_t{cfg.batch_size}, int64_t{cfg.epochs}, static_cast<int64_t>(cfg.seed)})
    PutLe<int64_t>(os, v);
  for (double v : {cfg.dropout_rate, cfg.lr_scale, cfg.initial_sigma, cfg.adam_beta1,
                   cfg.adam_beta2, cfg.adam_epsilon, cfg.layer_norm_epsilon})
    PutLe<double>(os, v);
  PutLe<uint64_t>(os, 4 + 13 * params.blocks.size());
  params.ForEachTensor([&](const char *, const RowMatrix &m) {
    PutLe<uint32_t>(os, 2);
    PutLe<uint64_t>(os, static_cast<uint64_t>(m.rows()));
    PutLe<uint64_t>(os, static_cast<uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) PutLe<double>(os, m.data()[i]);
  });
  if (!os) throw DataError("failed writing checkpoint");
}

std::pair<DurationNetConfig, DurationNetParams> ReadCheckpoint(std::istream &is) {
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw DataError("not a duration checkpoint (bad magic)");
  const uint64_t num_phones = GetLe<uint64_t>(is);
  DurationNetConfig cfg;
  cfg.embed_dim = static_cast<int>(GetLe<int64_t>(is));
  cfg.num_blocks = static_cast<int>(GetLe<int64_t>(is));
  cfg.num_heads = static_cast<int>(GetLe<int64_t>(is));
  cfg.ffn_dim = static_cast<int>(GetLe<int64_t>(is));
  cfg.max_seq_len = static_cast<int>(GetLe<int64_t>(is));
  cfg.warmup_steps = GetLe<int64_t>(is);
  cfg.batch_size = static_cast<int>(GetLe<int64_t>(is));
  cfg.epochs = static_cast<int>(GetLe<int64_t>(is));
  cfg.seed = static_cast<uint64_t>(GetLe<int64_t>(is));
  cfg.dropout_rate = GetLe<double>(is);
  cfg.lr_scale = GetLe<double>(is);
  cfg.initial_sigma = GetLe<double>(is);
  cfg.adam_beta1 = GetLe<double>(is);
  cfg.adam_beta2 = GetLe<double>(is);
  cfg.adam_epsilon = GetLe<double>(is);
  cfg.layer_norm_epsilon = GetLe<double>(is);
  try {
    cfg.Validate();
  } catch (const UsageError &e) {
    throw DataError(std::string("checkpoint config invalid: ") + e.what());
  }
  if (num_phones == 0 || num_phones > (1u << 20)) throw DataError("checkpoint phone count invalid");
  DurationNetParams params = DurationNetParams::Zeros(num_phones, cfg);
  const uint64_t count = GetLe<uint64_t>(is);
  if (count != 4 + 13 * params.blocks.size()) throw DataError("checkpoint tensor count mismatch");
  params.ForEachTensor([&](const char *name, RowMatrix &m) {
    const uint32_t rank = GetLe<uint32_t>(is);
    if (rank != 2) throw DataError(std::string("checkpoint tensor ") + name + " has bad rank");
    const uint64_t rows = GetLe<uint64_t>(is);
    const uint64_t cols = GetLe<uint64_t>(is);
    if (rows != static_cast<uint64_t>(m.rows()) || cols != static_cast<uint64_t>(m.cols()))
      throw DataError(std::string("checkpoint tensor ") + name + " has unexpected shape");
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = GetLe<double>(is);
      if (!std::isfinite(m.data()[i]))
        throw DataError(std::string("checkpoint tensor ") + name + " is not finite");
    }
  });
  return {cfg, std::move(params)};
}

void SaveCheckpoint(const std::string &path, const DurationNetConfig &cfg,
                    const DurationNetParams &params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path + " for writing");
  WriteCheckpoint(os, cfg, params);
}

std::pair<DurationNetConfig, DurationNetParams> LoadCheckpoint(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint " + path);
  return ReadCheckpoint(is);
}

}  // namespace cagop
