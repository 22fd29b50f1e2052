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

#include "cagop/aligner.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cagop {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct State {
  PhoneIndex phone;
  bool silence;
  int64_t min_frames;
};

}  // namespace

Alignment Align(const Posteriorgram &pg, const std::vector<PhoneIndex> &phones,
                const AlignConfig &cfg) {
  if (phones.empty()) throw DataError("cannot align an empty phone sequence");
  if (cfg.min_segment_frames < 1) throw UsageError("min_segment_frames must be >= 1");
  if (cfg.allow_optional_silence && !cfg.silence_phone)
    throw UsageError("optional silence requested but no silence phone given");
  const int64_t num_frames = pg.num_frames();
  const int64_t num_cols = pg.num_phones();
  for (PhoneIndex p : phones)
    if (p < 0 || p >= num_cols) throw DataError("phone index " + std::to_string(p) + " out of range");
  if (cfg.silence_phone && (*cfg.silence_phone < 0 || *cfg.silence_phone >= num_cols))
    throw DataError("silence phone out of range");

  const int64_t n = static_cast<int64_t>(phones.size());
  if (num_frames < n * cfg.min_segment_frames) {
    std::ostringstream msg;
    msg << "infeasible alignment: " << n << " phones need at least "
        << n * cfg.min_segment_frames << " frames, have " << num_frames;
    throw DataError(msg.str());
  }

  // With silence the states are sil_0 p_0 sil_1 p_1 ... p_{n-1} sil_n,
  // otherwise just the phones.
  const bool sil = cfg.allow_optional_silence;
  std::vector<State> states;
  for (int64_t k = 0; k < n; ++k) {
    if (sil) states.push_back({*cfg.silence_phone, true, 1});
    states.push_back({phones[k], false, cfg.min_segment_frames});
  }
  if (sil) states.push_back({*cfg.silence_phone, true, 1});
  const size_t num_states = states.size();

  // Successors in preference order: the next phone first, then silence.
  auto successors = [&](size_t i) {
    std::vector<size_t> next;
    if (sil) {
      if (states[i].silence) {
        if (i + 1 < num_states) next.push_back(i + 1);
      } else {
        if (i + 2 < num_states) next.push_back(i + 2);
        next.push_back(i + 1);
      }
    } else if (i + 1 < num_states) {
      next.push_back(i + 1);
    }
    return next;
  };
  auto can_finish = [&](size_t i) { return i + 1 == num_states || (sil && i + 2 == num_states); };

  // Prefix sums of per-frame log scores for each state.
  std::vector<std::vector<double>> cum(num_states, std::vector<double>(num_frames + 1, 0.0));
  for (size_t i = 0; i < num_states; ++i) {
    const double penalty = states[i].silence ? cfg.silence_self_loop_penalty : 0.0;
    for (int64_t t = 0; t < num_frames; ++t)
      cum[i][t + 1] = cum[i][t] +
                      std::log(std::max(pg.probs(t, states[i].phone), kProbFloor)) + penalty;
  }

  // best[i][s]: best score over frames [s, F) when state i starts at s.
  // end_of[i][s]: the end frame of state i on that path.
  std::vector<std::vector<double>> best(num_states, std::vector<double>(num_frames + 1, kNegInf));
  std::vector<std::vector<int64_t>> end_of(num_states, std::vector<int64_t>(num_frames + 1, -1));
  std::vector<double> run_value(num_states, kNegInf);
  std::vector<int64_t> run_end(num_states, -1);
  std::vector<std::vector<size_t>> succ(num_states);
  for (size_t i = 0; i < num_states; ++i) succ[i] = successors(i);

  auto continuation = [&](size_t i, int64_t e) {
    if (e == num_frames) return can_finish(i) ? 0.0 : kNegInf;
    double v = kNegInf;
    for (size_t j : succ[i]) v = std::max(v, best[j][e]);
    return v;
  };

  for (int64_t s = num_frames - 1; s >= 0; --s) {
    for (size_t i = num_states; i-- > 0;) {
      const int64_t e = s + states[i].min_frames;
      if (e <= num_frames) {
        const double v = cum[i][e] + continuation(i, e);
        // >= keeps the smallest end frame among ties.
        if (v >= run_value[i] && v != kNegInf) {
          run_value[i] = v;
          run_end[i] = e;
        }
      }
      if (run_value[i] != kNegInf) {
        best[i][s] = run_value[i] - cum[i][s];
        end_of[i][s] = run_end[i];
      }
    }
  }

  std::vector<size_t> starts;
  if (sil) {
    starts = {1, 0};
  } else {
    starts = {0};
  }
  auto pick = [&](const std::vector<size_t> &candidates, int64_t s) {
    size_t chosen = candidates.front();
    for (size_t j : candidates)
      if (best[j][s] > best[chosen][s]) chosen = j;
    return chosen;
  };

  size_t state = pick(starts, 0);
  if (best[state][0] == kNegInf) throw DataError("infeasible alignment");
  Alignment out;
  int64_t s = 0;
  while (true) {
    const int64_t e = end_of[state][s];
    out.segments.push_back({states[state].phone, s, e - s});
    if (e == num_frames) break;
    state = pick(succ[state], e);
    s = e;
  }
  return out;
}

double AlignmentLogScore(const Posteriorgram &pg, const Alignment &alignment) {
  double total = 0.0;
  for (const auto &seg : alignment.segments) {
    auto rows = SliceSegment(pg, seg);
    if (seg.phone < 0 || seg.phone >= pg.num_phones())
      throw DataError("segment phone out of range");
    for (Eigen::Index t = 0; t < rows.rows(); ++t)
      total += std::log(std::max(rows(t, seg.phone), kProbFloor));
  }
  return total;
}

}  // namespace cagop
