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

#ifndef PROSOREF_TEXTLESS_H_
#define PROSOREF_TEXTLESS_H_

// Reference vectors without a transcript, built from the greedy path of a
// CTC phone posteriorgram.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prosoref/dsp_features.h"
#include "prosoref/prosody.h"

namespace prosoref {

inline constexpr std::string_view kBlankSymbol = "<blank>";

struct Posteriorgram {
  std::vector<std::string> phones;  // last entry is the blank
  std::vector<std::vector<double>> rows;
  double hop_ms = 10.0;

  std::size_t blank_index() const { return phones.size() - 1; }
  std::size_t size() const { return rows.size(); }
  // Rows sum to 1 within 1e-6 and entries are in [0, 1].
  void Validate() const;
  // Lowest index wins a tie.
  std::size_t Argmax(std::size_t frame) const;
};

// A run of consecutive frames sharing one argmax label. rep_frame is the
// middle of the run, rounded down.
struct Emission {
  std::string phone;
  std::size_t run_start = 0;
  std::size_t run_end = 0;  // inclusive
  std::size_t rep_frame = 0;
  bool is_pau = false;

  std::size_t run_length() const { return run_end - run_start + 1; }
  bool operator==(const Emission&) const = default;
};

std::vector<Emission> GreedyEmissions(const Posteriorgram& pg);

// Maximal runs of blank argmax frames, in time order.
std::vector<Emission> BlankRuns(const Posteriorgram& pg);

inline constexpr double kPauseThresholdMs = 200.0;

// Interleaves a "pau" token for every blank run strictly longer than
// threshold_ms, placed at the run midpoint.
std::vector<Emission> InsertPauses(std::span<const Emission> emissions,
                                   std::span<const Emission> blank_runs, double hop_ms,
                                   double threshold_ms = kPauseThresholdMs);

std::vector<Emission> TextlessTokens(const Posteriorgram& pg,
                                     double threshold_ms = kPauseThresholdMs);

struct TextlessRefVector {
  std::string phone;
  bool is_pau = false;
  std::size_t rep_frame = 0;
  double f0 = 0.0;    // run voiced mean, z-units
  double mgc0 = 0.0;  // run c0 mean, z-units
  F0Source f0_source = F0Source::kState;
  double d_prev_s = 0.0;  // raw distance to previous token, seconds
  double d_next_s = 0.0;
  double d_prev = 0.0;  // normalized with the global duration stats
  double d_next = 0.0;
  std::vector<double> posterior_row;
};

// Raw per-token features before speaker normalization; f0/mgc0 hold Hz and
// c0 and d_prev/d_next equal d_prev_s/d_next_s.
std::vector<TextlessRefVector> TextlessRawFeatures(std::span<const Emission> tokens,
                                                   const PitchTrack& pitch,
                                                   const CepstralTrack& ceps,
                                                   const Posteriorgram& pg);

std::vector<TextlessRefVector> AggregateTextless(std::span<const Emission> tokens,
                                                 const PitchTrack& pitch,
                                                 const CepstralTrack& ceps,
                                                 const Posteriorgram& pg,
                                                 const SpeakerStats& stats);

// Speaker statistics for corpora without transcripts: pooled f0/mgc0 over the
// token run means and global duration over the neighbour distances.
SpeakerStats CollectTextlessStats(std::span<const std::vector<TextlessRefVector>> raw_corpus);

// Header row is the inventory with "<blank>" last; one row per frame.
std::string PosteriorgramToCsv(const Posteriorgram& pg);
Posteriorgram PosteriorgramFromCsv(std::string_view text, double hop_ms);
std::string PosteriorgramSidecarJson(double hop_ms);
double HopFromSidecarJson(std::string_view text);

// CSV columns phone,is_pau,rep_frame,f0,mgc0,d_prev,d_next,d_prev_s,d_next_s,
// f0_flag,posterior; posterior is the row at rep_frame joined by ';'.
std::string TextlessToCsv(std::span<const TextlessRefVector> vectors);
std::vector<TextlessRefVector> TextlessFromCsv(std::string_view text);

}  // namespace prosoref

#endif  // PROSOREF_TEXTLESS_H_
