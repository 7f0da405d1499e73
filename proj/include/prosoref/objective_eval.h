// Copyright 2026 The prosoref Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PROSOREF_OBJECTIVE_EVAL_H_
#define PROSOREF_OBJECTIVE_EVAL_H_

// Objective F0 comparison between a reference and a synthesized utterance:
// DTW over cepstral frames, the same path reused to pair F0 frames, then
// RMSE, Pearson correlation and F0 frame error.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prosoref/dsp_features.h"
#include "prosoref/error.h"

namespace prosoref {

using FrameSequence = std::vector<std::vector<double>>;

struct WarpPath {
  std::vector<std::pair<std::size_t, std::size_t>> steps;

  // Starts at (0, 0), ends at (a_len - 1, b_len - 1), moves by (1,0), (0,1)
  // or (1,1).
  bool IsValid(std::size_t a_len, std::size_t b_len) const;
};

struct DtwResult {
  WarpPath path;
  double cost = 0.0;
};

// Euclidean local distance, steps {(1,0), (0,1), (1,1)} without weights.
// Backtracking prefers the diagonal, then (1,0).
DtwResult Dtw(const FrameSequence& a, const FrameSequence& b);

struct F0Pair {
  double ref_f0 = 0.0;
  bool ref_voiced = false;
  double syn_f0 = 0.0;
  bool syn_voiced = false;
};

std::vector<F0Pair> AlignF0(const WarpPath& path, const PitchTrack& ref, const PitchTrack& syn);

inline constexpr double kGrossPitchThreshold = 0.20;

struct EvalReport {
  std::optional<double> rmse_hz;  // empty when no pair is voiced on both sides
  std::optional<double> corr;     // empty also when either side is constant
  double ffe_pct = 0.0;
  std::size_t n_frames = 0;
  std::size_t n_voiced_pairs = 0;
  std::vector<ErrorCode> issues;  // kNoVoicedOverlap, kZeroVariance
};

// RMSE and correlation use pairs voiced on both sides. FFE counts voicing
// mismatches plus both-voiced pairs with |syn - ref| / ref > threshold, as a
// percentage of all pairs.
EvalReport F0Metrics(std::span<const F0Pair> pairs, double gross_threshold = kGrossPitchThreshold);

struct UtterancePair {
  std::string id;
  PitchTrack ref_pitch;
  CepstralTrack ref_ceps;
  PitchTrack syn_pitch;
  CepstralTrack syn_ceps;
};

EvalReport EvaluateUtterance(const UtterancePair& pair,
                             double gross_threshold = kGrossPitchThreshold);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // population
  std::size_t count = 0;
};

MeanSd SummarizeValues(std::span<const double> values);

struct CorpusSummary {
  MeanSd rmse_hz;
  MeanSd corr;
  MeanSd ffe_pct;
  std::vector<std::string> ids;
  std::vector<EvalReport> reports;
};

CorpusSummary SummarizeReports(std::vector<std::string> ids, std::vector<EvalReport> reports);
CorpusSummary EvaluateCorpus(std::span<const UtterancePair> pairs,
                             double gross_threshold = kGrossPitchThreshold);

// "16.4 ± 7.4"
std::string FormatMeanSd(const MeanSd& m, int decimals);

std::string CorpusSummaryToJson(const CorpusSummary& summary);

struct TableRow {
  std::string model;
  std::string ref;
  CorpusSummary summary;
};

// Aligned text table with columns Model | Ref. | RMSE (Hz) | CORR | FFE (%).
std::string RenderTable(std::span<const TableRow> rows);

}  // namespace prosoref

#endif  // PROSOREF_OBJECTIVE_EVAL_H_
