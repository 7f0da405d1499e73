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

#ifndef PROSOREF_PROSODY_H_
#define PROSOREF_PROSODY_H_

// Per-phoneme prosodic vectors: mean F0 and mean c0 for each of the three
// phone states plus phone duration, and their per-speaker normalization.

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prosoref/alignment.h"
#include "prosoref/dsp_features.h"

namespace prosoref {

inline constexpr std::size_t kProsodyDims = 7;
inline constexpr double kVarianceFloor = 1e-8;

// Where a state's F0 came from. Anything but kState is a fallback.
enum class F0Source : char {
  kState = 's',      // voiced frames of the state itself
  kPhone = 'p',      // voiced mean of the whole phone
  kUtterance = 'u',  // voiced mean of the utterance
  kMissing = 'x',    // nothing voiced; raw 0, normalized to 0
};

enum class DurationScale { kLinear, kLog };

struct ProsodyVector {
  std::string phone;
  std::array<double, 3> f0{};  // Hz raw, z-units once normalized
  std::array<double, 3> mgc0{};
  double duration = 0.0;  // seconds raw, z-units once normalized
  std::array<F0Source, 3> f0_source{F0Source::kState, F0Source::kState, F0Source::kState};
  bool duration_fallback = false;  // global rather than per-phone stats

  bool f0_missing(std::size_t state) const { return f0_source[state] != F0Source::kState; }
  std::array<double, kProsodyDims> Numeric() const;
};

struct Moments {
  double mean = 0.0;
  double var = 1.0;
  std::size_t count = 0;

  bool operator==(const Moments&) const = default;
};

// Population moments, variance floored at kVarianceFloor. Empty input gives
// {0, 1, 0}.
Moments ComputeMoments(std::span<const double> values);

struct SpeakerStats {
  std::array<Moments, 3> f0;    // per state, over non-fallback values
  std::array<Moments, 3> mgc0;  // per state
  Moments f0_pooled;            // all states together (text-less vectors)
  Moments mgc0_pooled;
  Moments duration_global;
  std::map<std::string, Moments> duration_per_phone;
  DurationScale duration_scale = DurationScale::kLinear;
  // Per-phone duration stats are used only for phones seen this often.
  std::size_t min_phone_count = 2;

  bool operator==(const SpeakerStats&) const = default;
};

struct AlignedUtterance {
  PitchTrack pitch;
  CepstralTrack ceps;
  PhoneAlignment alignment;
};

struct AggregateOptions {
  // Allowed difference, in frames, between the track length and the
  // alignment duration. Framing with a 25 ms window loses about 1.5 frames
  // at the end of the signal, hence more than one.
  int frame_tolerance = 3;
};

std::vector<ProsodyVector> AggregateUtterance(const PitchTrack& pitch, const CepstralTrack& ceps,
                                              const PhoneAlignment& alignment,
                                              const AggregateOptions& options = {});

// Throws kTrackAlignmentMismatch if the tracks disagree with each other or
// with the alignment duration.
void CheckTrackConsistency(const PitchTrack& pitch, const CepstralTrack& ceps,
                           double total_s, int frame_tolerance);

double ScaleDuration(double seconds, DurationScale scale);

SpeakerStats CollectSpeakerStats(std::span<const AlignedUtterance> corpus,
                                 DurationScale scale = DurationScale::kLinear,
                                 const AggregateOptions& options = {});

// Same statistics from already aggregated raw vectors.
SpeakerStats StatsFromVectors(std::span<const std::vector<ProsodyVector>> utterances,
                              DurationScale scale = DurationScale::kLinear);

std::vector<ProsodyVector> Normalize(std::span<const ProsodyVector> vectors,
                                     const SpeakerStats& stats);

// CSV with header phone,f0_1,f0_2,f0_3,mgc0_1,mgc0_2,mgc0_3,dur,flags. flags
// holds the three F0Source letters followed by 'p' (per-phone duration
// statistics) or 'g' (global fallback).
std::string ProsodyToCsv(std::span<const ProsodyVector> vectors);
std::vector<ProsodyVector> ProsodyFromCsv(std::string_view text);

// Multi-utterance variant with a leading utt column.
struct UtteranceVectors {
  std::string utt;
  std::vector<ProsodyVector> vectors;
};
std::string ProsodyCorpusToCsv(std::span<const UtteranceVectors> corpus);
std::vector<UtteranceVectors> ProsodyCorpusFromCsv(std::string_view text);

std::string SpeakerStatsToJson(const SpeakerStats& stats);
SpeakerStats SpeakerStatsFromJson(std::string_view text);

}  // namespace prosoref

#endif  // PROSOREF_PROSODY_H_
