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

#ifndef PROSOREF_LISTENING_STATS_H_
#define PROSOREF_LISTENING_STATS_H_

// MUSHRA score analysis: per-system medians and quartiles, pairwise
// Wilcoxon signed-rank and paired t-tests, Holm step-down correction.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace prosoref {

struct MushraRating {
  std::string listener;
  std::string utterance;
  std::string system;
  double score = 0.0;
};

struct MushraScores {
  std::vector<std::string> systems;  // order of first appearance
  std::vector<MushraRating> ratings;

  // Scores in [0, 100], no duplicate cells, every (listener, utterance)
  // block rates every system.
  void Validate() const;
};

MushraScores MushraFromCsv(std::string_view text);

// Even counts average the two middle values.
double Median(std::span<const double> values);
// Linear interpolation between order statistics (Hyndman-Fan type 7).
double Quantile(std::span<const double> values, double q);

std::vector<std::pair<std::string, double>> MushraMedians(const MushraScores& scores);

struct Quartiles {
  std::string system;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};
std::vector<Quartiles> MushraQuartiles(const MushraScores& scores);
std::string QuartilesToCsv(std::span<const Quartiles> rows);

// Scores of systems a and b paired by (listener, utterance) block, in
// block order of first appearance.
std::pair<std::vector<double>, std::vector<double>> PairedSamples(const MushraScores& scores,
                                                                  std::string_view a,
                                                                  std::string_view b);

struct WilcoxonOptions {
  // Exact enumeration up to this many non-zero differences.
  std::size_t exact_max_n = 12;
  std::size_t min_n = 5;
  bool continuity_correction = true;
};

struct WilcoxonResult {
  double p = 1.0;
  double w_plus = 0.0;  // sum of (mid)ranks of positive differences
  std::size_t n_used = 0;
  bool exact = false;
};

// Two-sided. Zero differences are dropped; ties get midranks.
WilcoxonResult WilcoxonSignedRank(std::span<const double> x, std::span<const double> y,
                                  const WilcoxonOptions& options = {});

struct PairedTResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

PairedTResult PairedT(std::span<const double> x, std::span<const double> y);

// Two-sided Student-t tail probability P(|T| >= |t|).
double StudentTTwoSided(double t, double df);

struct HolmResult {
  std::vector<bool> reject;
  std::vector<double> adjusted;
};

HolmResult HolmCorrection(std::span<const double> pvals, double alpha = 0.05);

struct MushraReportOptions {
  WilcoxonOptions wilcoxon;
  std::vector<double> alphas = {0.05, 0.01};
};

std::string MushraReportJson(const MushraScores& scores, const MushraReportOptions& options = {});

}  // namespace prosoref

#endif  // PROSOREF_LISTENING_STATS_H_
