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

#include "prosoref/prosody.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "prosoref/error.h"
#include "prosoref/text_format.h"

namespace prosoref {
namespace {

using nlohmann::json;

constexpr std::string_view kCsvHeader = "phone,f0_1,f0_2,f0_3,mgc0_1,mgc0_2,mgc0_3,dur,flags";

double VoicedMean(const PitchTrack& pitch, FrameRange range, std::size_t* count) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = range.begin; t < range.end; ++t) {
    if (pitch.voiced[t]) {
      sum += pitch.f0_hz[t];
      ++n;
    }
  }
  *count = n;
  return n ? sum / static_cast<double>(n) : 0.0;
}

double Z(double value, const Moments& m) { return (value - m.mean) / std::sqrt(m.var); }

std::string FlagString(const ProsodyVector& v) {
  std::string flags;
  for (auto s : v.f0_source) flags.push_back(static_cast<char>(s));
  flags.push_back(v.duration_fallback ? 'g' : 'p');
  return flags;
}

void ParseFlags(std::string_view flags, ProsodyVector& v, const std::string& where) {
  if (flags.size() != 4) Fail(ErrorCode::kMalformedLine, where + "flags must have 4 letters");
  for (int i = 0; i < 3; ++i) {
    switch (flags[i]) {
      case 's': v.f0_source[i] = F0Source::kState; break;
      case 'p': v.f0_source[i] = F0Source::kPhone; break;
      case 'u': v.f0_source[i] = F0Source::kUtterance; break;
      case 'x': v.f0_source[i] = F0Source::kMissing; break;
      default: Fail(ErrorCode::kMalformedLine, where + "unknown F0 flag");
    }
  }
  if (flags[3] != 'p' && flags[3] != 'g') {
    Fail(ErrorCode::kMalformedLine, where + "unknown duration flag");
  }
  v.duration_fallback = flags[3] == 'g';
}

std::string VectorRow(const ProsodyVector& v) {
  if (v.phone.find_first_of(",\n\t") != std::string::npos) {
    Fail(ErrorCode::kInvalidArgument, "phone symbol contains a separator: " + v.phone);
  }
  std::string row = v.phone;
  for (double x : v.Numeric()) row += ',' + FormatShortest(x);
  row += ',' + FlagString(v);
  return row;
}

ProsodyVector ParseVectorFields(std::span<const std::string_view> f, const std::string& where) {
  if (f.size() != 9) Fail(ErrorCode::kMalformedLine, where + "expected 9 fields");
  ProsodyVector v;
  v.phone = std::string(Trim(f[0]));
  if (v.phone.empty()) Fail(ErrorCode::kMalformedLine, where + "empty phone");
  std::array<double, kProsodyDims> num{};
  for (std::size_t i = 0; i < kProsodyDims; ++i) {
    auto x = ParseDouble(f[1 + i]);
    if (!x) Fail(ErrorCode::kMalformedLine, where + "bad number '" + std::string(f[1 + i]) + "'");
    num[i] = *x;
  }
  std::copy_n(num.begin(), 3, v.f0.begin());
  std::copy_n(num.begin() + 3, 3, v.mgc0.begin());
  v.duration = num[6];
  ParseFlags(Trim(f[8]), v, where);
  return v;
}

json MomentsJson(const Moments& m) {
  return json{{"mean", m.mean}, {"var", m.var}, {"count", m.count}};
}

Moments MomentsFrom(const json& j) {
  Moments m{j.at("mean").get<double>(), j.at("var").get<double>(),
            j.at("count").get<std::size_t>()};
  if (!(m.var >= kVarianceFloor) || !std::isfinite(m.mean)) {
    Fail(ErrorCode::kInvalidArgument, "speaker stats: variance below floor or non-finite mean");
  }
  return m;
}

}  // namespace

std::array<double, kProsodyDims> ProsodyVector::Numeric() const {
  return {f0[0], f0[1], f0[2], mgc0[0], mgc0[1], mgc0[2], duration};
}

Moments ComputeMoments(std::span<const double> values) {
  if (values.empty()) return {};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(values.size());
  return {mean, std::max(var, kVarianceFloor), values.size()};
}

void CheckTrackConsistency(const PitchTrack& pitch, const CepstralTrack& ceps, double total_s,
                           int frame_tolerance) {
  if (pitch.hop_ms != ceps.hop_ms || !(pitch.hop_ms > 0.0)) {
    Fail(ErrorCode::kTrackAlignmentMismatch, "pitch and cepstral tracks use different hops");
  }
  if (pitch.voiced.size() != pitch.f0_hz.size()) {
    Fail(ErrorCode::kTrackAlignmentMismatch, "pitch track voicing/f0 length differ");
  }
  const auto np = static_cast<long long>(pitch.size());
  const auto nc = static_cast<long long>(ceps.size());
  if (np == 0 || nc == 0 || std::llabs(np - nc) > 1) {
    Fail(ErrorCode::kTrackAlignmentMismatch,
         "track lengths " + std::to_string(np) + " and " + std::to_string(nc) + " disagree");
  }
  const long long expected = std::llround(total_s * 1000.0 / pitch.hop_ms);
  if (std::llabs(std::min(np, nc) - expected) > frame_tolerance) {
    Fail(ErrorCode::kTrackAlignmentMismatch,
         "alignment spans " + std::to_string(expected) + " frames but tracks have " +
             std::to_string(std::min(np, nc)));
  }
}

std::vector<ProsodyVector> AggregateUtterance(const PitchTrack& pitch, const CepstralTrack& ceps,
                                              const PhoneAlignment& alignment,
                                              const AggregateOptions& options) {
  CheckTrackConsistency(pitch, ceps, alignment.total_s, options.frame_tolerance);
  const std::size_t n = std::min(pitch.size(), ceps.size());
  const double hop = pitch.hop_ms;

  std::size_t utt_voiced = 0;
  const double utt_mean = VoicedMean(pitch, {0, n}, &utt_voiced);

  std::vector<ProsodyVector> out;
  out.reserve(alignment.segments.size());
  for (const auto& seg : alignment.segments) {
    ProsodyVector v;
    v.phone = seg.phone;
    v.duration = seg.duration();

    std::size_t phone_voiced = 0;
    const double phone_mean =
        VoicedMean(pitch, FramesInInterval({seg.start_s, seg.end_s}, hop, n), &phone_voiced);

    for (std::size_t s = 0; s < 3; ++s) {
      const FrameRange range = FramesInInterval(seg.states[s], hop, n);
      std::size_t voiced = 0;
      const double state_mean = VoicedMean(pitch, range, &voiced);
      if (voiced > 0) {
        v.f0[s] = state_mean;
        v.f0_source[s] = F0Source::kState;
      } else if (phone_voiced > 0) {
        v.f0[s] = phone_mean;
        v.f0_source[s] = F0Source::kPhone;
      } else if (utt_voiced > 0) {
        v.f0[s] = utt_mean;
        v.f0_source[s] = F0Source::kUtterance;
      } else {
        v.f0[s] = 0.0;
        v.f0_source[s] = F0Source::kMissing;
      }

      if (range.empty()) {
        // State shorter than a hop: take the frame nearest its midpoint.
        const double mid = 0.5 * (seg.states[s].start_s + seg.states[s].end_s);
        const auto t = static_cast<std::size_t>(
            std::clamp(std::floor(mid * 1000.0 / hop), 0.0, static_cast<double>(n - 1)));
        v.mgc0[s] = ceps.frames[t][0];
      } else {
        double sum = 0.0;
        for (std::size_t t = range.begin; t < range.end; ++t) sum += ceps.frames[t][0];
        v.mgc0[s] = sum / static_cast<double>(range.size());
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

double ScaleDuration(double seconds, DurationScale scale) {
  return scale == DurationScale::kLog ? std::log(seconds) : seconds;
}

SpeakerStats StatsFromVectors(std::span<const std::vector<ProsodyVector>> utterances,
                              DurationScale scale) {
  if (utterances.empty()) Fail(ErrorCode::kEmptyCorpus, "no utterances");
  std::array<std::vector<double>, 3> f0, mgc0;
  std::vector<double> f0_all, mgc0_all, dur_all;
  std::map<std::string, std::vector<double>> dur_phone;
  for (const auto& utt : utterances) {
    for (const auto& v : utt) {
      for (std::size_t s = 0; s < 3; ++s) {
        if (!v.f0_missing(s)) {
          f0[s].push_back(v.f0[s]);
          f0_all.push_back(v.f0[s]);
        }
        mgc0[s].push_back(v.mgc0[s]);
        mgc0_all.push_back(v.mgc0[s]);
      }
      const double d = ScaleDuration(v.duration, scale);
      dur_all.push_back(d);
      dur_phone[v.phone].push_back(d);
    }
  }
  SpeakerStats stats;
  stats.duration_scale = scale;
  for (std::size_t s = 0; s < 3; ++s) {
    stats.f0[s] = ComputeMoments(f0[s]);
    stats.mgc0[s] = ComputeMoments(mgc0[s]);
  }
  stats.f0_pooled = ComputeMoments(f0_all);
  stats.mgc0_pooled = ComputeMoments(mgc0_all);
  stats.duration_global = ComputeMoments(dur_all);
  for (const auto& [phone, values] : dur_phone) {
    stats.duration_per_phone[phone] = ComputeMoments(values);
  }
  return stats;
}

SpeakerStats CollectSpeakerStats(std::span<const AlignedUtterance> corpus, DurationScale scale,
                                 const AggregateOptions& options) {
  if (corpus.empty()) Fail(ErrorCode::kEmptyCorpus, "no utterances");
  std::vector<std::vector<ProsodyVector>> raw;
  raw.reserve(corpus.size());
  for (const auto& utt : corpus) {
    raw.push_back(AggregateUtterance(utt.pitch, utt.ceps, utt.alignment, options));
  }
  return StatsFromVectors(raw, scale);
}

std::vector<ProsodyVector> Normalize(std::span<const ProsodyVector> vectors,
                                     const SpeakerStats& stats) {
  std::vector<ProsodyVector> out(vectors.begin(), vectors.end());
  for (auto& v : out) {
    for (std::size_t s = 0; s < 3; ++s) {
      v.f0[s] = v.f0_source[s] == F0Source::kMissing ? 0.0 : Z(v.f0[s], stats.f0[s]);
      v.mgc0[s] = Z(v.mgc0[s], stats.mgc0[s]);
    }
    const double d = ScaleDuration(v.duration, stats.duration_scale);
    auto it = stats.duration_per_phone.find(v.phone);
    if (it != stats.duration_per_phone.end() && it->second.count >= stats.min_phone_count) {
      v.duration = Z(d, it->second);
      v.duration_fallback = false;
    } else {
      v.duration = Z(d, stats.duration_global);
      v.duration_fallback = true;
    }
  }
  return out;
}

std::string ProsodyToCsv(std::span<const ProsodyVector> vectors) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& v : vectors) out += VectorRow(v) + '\n';
  return out;
}

std::vector<ProsodyVector> ProsodyFromCsv(std::string_view text) {
  auto lines = SplitLines(text);
  if (lines.empty() || Trim(lines[0]) != kCsvHeader) {
    Fail(ErrorCode::kMalformedLine, "line 1: expected header '" + std::string(kCsvHeader) + "'");
  }
  std::vector<ProsodyVector> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    auto fields = SplitFields(lines[i], ',');
    out.push_back(ParseVectorFields(fields, "line " + std::to_string(i + 1) + ": "));
  }
  return out;
}

std::string ProsodyCorpusToCsv(std::span<const UtteranceVectors> corpus) {
  std::string out = "utt," + std::string(kCsvHeader) + '\n';
  for (const auto& utt : corpus) {
    if (utt.utt.find_first_of(",\n") != std::string::npos) {
      Fail(ErrorCode::kInvalidArgument, "utterance id contains a separator: " + utt.utt);
    }
    for (const auto& v : utt.vectors) out += utt.utt + ',' + VectorRow(v) + '\n';
  }
  return out;
}

std::vector<UtteranceVectors> ProsodyCorpusFromCsv(std::string_view text) {
  auto lines = SplitLines(text);
  if (lines.empty() || Trim(lines[0]) != "utt," + std::string(kCsvHeader)) {
    Fail(ErrorCode::kMalformedLine, "line 1: expected utt-prefixed prosody header");
  }
  std::vector<UtteranceVectors> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    auto fields = SplitFields(lines[i], ',');
    const std::string where = "line " + std::to_string(i + 1) + ": ";
    if (fields.size() != 10) Fail(ErrorCode::kMalformedLine, where + "expected 10 fields");
    std::string utt(Trim(fields[0]));
    if (out.empty() || out.back().utt != utt) out.push_back({utt, {}});
    out.back().vectors.push_back(
        ParseVectorFields(std::span(fields).subspan(1), where));
  }
  return out;
}

std::string SpeakerStatsToJson(const SpeakerStats& stats) {
  json j;
  j["duration_scale"] = stats.duration_scale == DurationScale::kLog ? "log" : "linear";
  j["min_phone_count"] = stats.min_phone_count;
  for (std::size_t s = 0; s < 3; ++s) {
    j["f0"].push_back(MomentsJson(stats.f0[s]));
    j["mgc0"].push_back(MomentsJson(stats.mgc0[s]));
  }
  j["f0_pooled"] = MomentsJson(stats.f0_pooled);
  j["mgc0_pooled"] = MomentsJson(stats.mgc0_pooled);
  j["duration_global"] = MomentsJson(stats.duration_global);
  j["duration_per_phone"] = json::object();
  for (const auto& [phone, m] : stats.duration_per_phone) {
    j["duration_per_phone"][phone] = MomentsJson(m);
  }
  return j.dump(2) + "\n";
}

SpeakerStats SpeakerStatsFromJson(std::string_view text) {
  try {
    const json j = json::parse(text);
    SpeakerStats stats;
    const auto scale = j.at("duration_scale").get<std::string>();
    if (scale != "linear" && scale != "log") {
      Fail(ErrorCode::kInvalidArgument, "duration_scale must be 'linear' or 'log'");
    }
    stats.duration_scale = scale == "log" ? DurationScale::kLog : DurationScale::kLinear;
    stats.min_phone_count = j.at("min_phone_count").get<std::size_t>();
    if (j.at("f0").size() != 3 || j.at("mgc0").size() != 3) {
      Fail(ErrorCode::kInvalidArgument, "speaker stats need three f0 and mgc0 entries");
    }
    for (std::size_t s = 0; s < 3; ++s) {
      stats.f0[s] = MomentsFrom(j.at("f0")[s]);
      stats.mgc0[s] = MomentsFrom(j.at("mgc0")[s]);
    }
    stats.f0_pooled = MomentsFrom(j.at("f0_pooled"));
    stats.mgc0_pooled = MomentsFrom(j.at("mgc0_pooled"));
    stats.duration_global = MomentsFrom(j.at("duration_global"));
    for (const auto& [phone, m] : j.at("duration_per_phone").items()) {
      stats.duration_per_phone[phone] = MomentsFrom(m);
      if (stats.duration_per_phone[phone].count < 1) {
        Fail(ErrorCode::kInvalidArgument, "phone '" + phone + "' has zero count");
      }
    }
    return stats;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("speaker stats json: ") + e.what());
  }
}

}  // namespace prosoref
