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

#include "prosoref/dsp_features.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>

#include "json.hpp"

#include "prosoref/error.h"

namespace prosoref {
namespace {

using nlohmann::json;

std::size_t MsToSamples(double ms, int sample_rate) {
  return static_cast<std::size_t>(std::llround(ms * sample_rate / 1000.0));
}

void CheckWave(const Waveform& wav) {
  if (wav.sample_rate < 8000) {
    Fail(ErrorCode::kInvalidArgument,
         "sample rate must be >= 8000, got " + std::to_string(wav.sample_rate));
  }
  if (wav.samples.empty()) Fail(ErrorCode::kInvalidArgument, "empty waveform");
}

// FFTW's planner is not reentrant; execution with the new-array interface is.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    std::lock_guard lock(PlannerMutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(PlannerMutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  // Power spectrum |X_k|^2 for k = 0..n/2 of the zero-padded frame.
  void Power(const std::vector<double>& frame, std::vector<double>& power) {
    std::fill(in_.get(), in_.get() + n_, 0.0);
    std::copy(frame.begin(), frame.end(), in_.get());
    fftw_execute(plan_);
    power.resize(n_ / 2 + 1);
    for (std::size_t k = 0; k < power.size(); ++k) {
      power[k] = out_.get()[k][0] * out_.get()[k][0] + out_.get()[k][1] * out_.get()[k][1];
    }
  }

 private:
  std::size_t n_;
  std::unique_ptr<double, FftwFree> in_;
  std::unique_ptr<fftw_complex, FftwFree> out_;
  fftw_plan plan_;
};

std::size_t NextPow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filters on the HTK mel scale spanning 0..Nyquist, sampled at
// the FFT bin frequencies.
std::vector<std::vector<double>> MelFilterbank(int n_mels, std::size_t n_fft, int sample_rate) {
  const std::size_t n_bins = n_fft / 2 + 1;
  const double mel_hi = HzToMel(sample_rate / 2.0);
  std::vector<double> edges(n_mels + 2);
  for (int m = 0; m < n_mels + 2; ++m) {
    edges[m] = MelToHz(mel_hi * m / (n_mels + 1));
  }
  std::vector<std::vector<double>> bank(n_mels, std::vector<double>(n_bins, 0.0));
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(n_fft);
      if (f > lo && f < hi) {
        bank[m][k] = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
      }
    }
  }
  return bank;
}

}  // namespace

std::size_t FrameSpec::WindowSamples(int sample_rate) const {
  return MsToSamples(window_ms, sample_rate);
}

std::size_t FrameSpec::HopSamples(int sample_rate) const {
  return MsToSamples(hop_ms, sample_rate);
}

void FrameSpec::Validate() const {
  if (!(hop_ms > 0.0) || !(hop_ms <= window_ms)) {
    Fail(ErrorCode::kInvalidArgument, "frame spec requires 0 < hop_ms <= window_ms");
  }
}

std::size_t FrameCount(std::size_t n_samples, std::size_t window, std::size_t hop) {
  if (window == 0 || hop == 0 || n_samples < window) return 0;
  return (n_samples - window) / hop + 1;
}

std::vector<std::vector<double>> FrameSignal(const Waveform& wav, const FrameSpec& spec) {
  spec.Validate();
  CheckWave(wav);
  const std::size_t w = spec.WindowSamples(wav.sample_rate);
  const std::size_t h = spec.HopSamples(wav.sample_rate);
  const std::size_t n = FrameCount(wav.samples.size(), w, h);
  std::vector<std::vector<double>> frames;
  frames.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    auto first = wav.samples.begin() + static_cast<std::ptrdiff_t>(t * h);
    frames.emplace_back(first, first + static_cast<std::ptrdiff_t>(w));
  }
  return frames;
}

PitchTrack EstimateF0(const Waveform& wav, const FrameSpec& spec, const PitchOptions& options) {
  CheckWave(wav);
  const double nyquist = wav.sample_rate / 2.0;
  if (!(options.f0_min > 0.0) || !(options.f0_min < options.f0_max) ||
      !(options.f0_max < nyquist)) {
    Fail(ErrorCode::kInvalidRange, "need 0 < f0_min < f0_max < sample_rate/2");
  }
  const std::size_t w = spec.WindowSamples(wav.sample_rate);
  const auto lag_min = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::floor(wav.sample_rate / options.f0_max)));
  const auto lag_max = static_cast<std::size_t>(std::ceil(wav.sample_rate / options.f0_min));
  if (lag_max + 2 > w) {
    Fail(ErrorCode::kInvalidRange, "analysis window too short for f0_min " +
                                       std::to_string(options.f0_min) + " Hz");
  }

  const auto frames = FrameSignal(wav, spec);
  PitchTrack track;
  track.hop_ms = spec.hop_ms;
  track.f0_hz.assign(frames.size(), 0.0);
  track.voiced.assign(frames.size(), false);

  std::vector<double> x(w);
  std::vector<double> r(lag_max + 2, 0.0);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& frame = frames[t];
    double mean = 0.0;
    for (double v : frame) mean += v;
    mean /= static_cast<double>(w);
    double energy = 0.0;
    for (std::size_t n = 0; n < w; ++n) {
      x[n] = frame[n] - mean;
      energy += x[n] * x[n];
    }
    if (std::sqrt(energy / static_cast<double>(w)) <= options.silence_rms) continue;

    for (std::size_t lag = lag_min - 1; lag <= lag_max + 1; ++lag) {
      double cross = 0.0, head = 0.0, tail = 0.0;
      for (std::size_t n = 0; n + lag < w; ++n) {
        cross += x[n] * x[n + lag];
        head += x[n] * x[n];
        tail += x[n + lag] * x[n + lag];
      }
      const double denom = std::sqrt(head * tail);
      r[lag] = denom > 0.0 ? cross / denom : 0.0;
    }

    double best = -1.0;
    for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
      if (r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1]) best = std::max(best, r[lag]);
    }
    if (best < options.voicing_threshold) continue;
    std::size_t chosen = lag_min;
    for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
      if (r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] >= options.octave_ratio * best) {
        chosen = lag;
        break;
      }
    }

    const double a = r[chosen - 1], b = r[chosen], c = r[chosen + 1];
    const double curvature = a - 2.0 * b + c;
    double shift = curvature < 0.0 ? 0.5 * (a - c) / curvature : 0.0;
    shift = std::clamp(shift, -0.5, 0.5);
    const double f0 = wav.sample_rate / (static_cast<double>(chosen) + shift);
    track.f0_hz[t] = std::clamp(f0, options.f0_min, options.f0_max);
    track.voiced[t] = true;
  }
  return track;
}

CepstralTrack ComputeCepstra(const Waveform& wav, const FrameSpec& spec,
                             const CepstraOptions& options) {
  CheckWave(wav);
  spec.Validate();
  const std::size_t w = spec.WindowSamples(wav.sample_rate);
  const std::size_t n_fft = NextPow2(w);
  const std::size_t n_bins = n_fft / 2 + 1;
  if (options.n_ceps < 1 || options.n_mels < 1 || options.n_ceps > options.n_mels ||
      static_cast<std::size_t>(options.n_mels) > n_bins) {
    Fail(ErrorCode::kInvalidOrder, "need 1 <= n_ceps <= n_mels <= " + std::to_string(n_bins));
  }

  std::vector<double> window(w);
  for (std::size_t n = 0; n < w; ++n) {
    window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                     static_cast<double>(w));
  }
  const auto bank = MelFilterbank(options.n_mels, n_fft, wav.sample_rate);
  const int m_count = options.n_mels;
  // Scaled by 1/M so that c0 is the mean log mel energy.
  std::vector<std::vector<double>> dct(options.n_ceps, std::vector<double>(m_count));
  for (int k = 0; k < options.n_ceps; ++k) {
    for (int m = 0; m < m_count; ++m) {
      dct[k][m] = std::cos(std::numbers::pi * k * (m + 0.5) / m_count) / m_count;
    }
  }

  auto frames = FrameSignal(wav, spec);
  RealFft fft(n_fft);
  CepstralTrack track;
  track.hop_ms = spec.hop_ms;
  track.frames.reserve(frames.size());
  std::vector<double> power, log_mel(m_count);
  for (auto& frame : frames) {
    for (std::size_t n = 0; n < w; ++n) frame[n] *= window[n];
    fft.Power(frame, power);
    for (int m = 0; m < m_count; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < n_bins; ++k) e += bank[m][k] * power[k];
      log_mel[m] = std::log(std::max(e, options.log_floor));
    }
    std::vector<double> ceps(options.n_ceps, 0.0);
    for (int k = 0; k < options.n_ceps; ++k) {
      for (int m = 0; m < m_count; ++m) ceps[k] += dct[k][m] * log_mel[m];
    }
    track.frames.push_back(std::move(ceps));
  }
  return track;
}

std::string PitchTrackToJson(const PitchTrack& track) {
  json j;
  j["hop_ms"] = track.hop_ms;
  j["f0"] = track.f0_hz;
  j["voiced"] = track.voiced;
  return j.dump() + "\n";
}

PitchTrack PitchTrackFromJson(const std::string& text) {
  try {
    const json j = json::parse(text);
    PitchTrack track;
    track.hop_ms = j.at("hop_ms").get<double>();
    track.f0_hz = j.at("f0").get<std::vector<double>>();
    track.voiced = j.at("voiced").get<std::vector<bool>>();
    if (track.f0_hz.size() != track.voiced.size()) {
      Fail(ErrorCode::kInvalidArgument, "f0 and voiced arrays differ in length");
    }
    for (std::size_t i = 0; i < track.size(); ++i) {
      if ((track.f0_hz[i] > 0.0) != track.voiced[i]) {
        Fail(ErrorCode::kInvalidArgument,
             "frame " + std::to_string(i) + ": f0 > 0 must coincide with voiced");
      }
    }
    return track;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("pitch track json: ") + e.what());
  }
}

std::string CepstralTrackToJson(const CepstralTrack& track) {
  json j;
  j["hop_ms"] = track.hop_ms;
  j["ceps"] = track.frames;
  return j.dump() + "\n";
}

CepstralTrack CepstralTrackFromJson(const std::string& text) {
  try {
    const json j = json::parse(text);
    CepstralTrack track;
    track.hop_ms = j.at("hop_ms").get<double>();
    track.frames = j.at("ceps").get<std::vector<std::vector<double>>>();
    for (const auto& f : track.frames) {
      if (f.size() != track.order()) {
        Fail(ErrorCode::kInvalidArgument, "cepstral frames differ in length");
      }
    }
    return track;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("cepstral track json: ") + e.what());
  }
}

}  // namespace prosoref
