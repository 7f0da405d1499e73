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

#ifndef PROSOREF_DSP_FEATURES_H_
#define PROSOREF_DSP_FEATURES_H_

// Frame-level prosodic features: F0 with voicing decisions and mel cepstra
// whose c0 serves as the mgc0 (log power) stand-in.

#include <cstddef>
#include <string>
#include <vector>

#include "prosoref/wav.h"

namespace prosoref {

struct FrameSpec {
  double window_ms = 25.0;
  double hop_ms = 10.0;

  std::size_t WindowSamples(int sample_rate) const;
  std::size_t HopSamples(int sample_rate) const;
  void Validate() const;
};

struct PitchTrack {
  std::vector<double> f0_hz;  // 0 when unvoiced
  std::vector<bool> voiced;
  double hop_ms = 10.0;

  std::size_t size() const { return f0_hz.size(); }
};

struct CepstralTrack {
  std::vector<std::vector<double>> frames;  // frames[t][0] is c0
  double hop_ms = 10.0;

  std::size_t size() const { return frames.size(); }
  std::size_t order() const { return frames.empty() ? 0 : frames.front().size(); }
};

struct PitchOptions {
  double f0_min = 60.0;
  double f0_max = 400.0;
  // Normalized autocorrelation peak needed to call a frame voiced.
  double voicing_threshold = 0.5;
  // Frames with RMS at or below this are silent, hence unvoiced.
  double silence_rms = 1e-4;
  // The shortest lag whose peak reaches this fraction of the best peak wins;
  // keeps sub-octave lags from beating the true period on clean signals.
  double octave_ratio = 0.9;
};

struct CepstraOptions {
  int n_mels = 40;
  int n_ceps = 13;
  double log_floor = 1e-10;
};

// Windows of WindowSamples() samples every HopSamples(); trailing samples
// that do not fill a window are dropped.
std::size_t FrameCount(std::size_t n_samples, std::size_t window, std::size_t hop);
std::vector<std::vector<double>> FrameSignal(const Waveform& wav, const FrameSpec& spec);

PitchTrack EstimateF0(const Waveform& wav, const FrameSpec& spec,
                      const PitchOptions& options = {});

CepstralTrack ComputeCepstra(const Waveform& wav, const FrameSpec& spec,
                             const CepstraOptions& options = {});

// Track JSON: {"hop_ms": .., "f0": [..], "voiced": [..]} and
// {"hop_ms": .., "ceps": [[..], ..]}.
std::string PitchTrackToJson(const PitchTrack& track);
PitchTrack PitchTrackFromJson(const std::string& text);
std::string CepstralTrackToJson(const CepstralTrack& track);
CepstralTrack CepstralTrackFromJson(const std::string& text);

}  // namespace prosoref

#endif  // PROSOREF_DSP_FEATURES_H_
