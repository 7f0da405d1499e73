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

#include "prosoref/textless.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "prosoref/error.h"
#include "prosoref/text_format.h"

namespace prosoref {
namespace {

constexpr std::string_view kTextlessHeader =
    "phone,is_pau,rep_frame,f0,mgc0,d_prev,d_next,d_prev_s,d_next_s,f0_flag,posterior";

std::size_t MidFrame(std::size_t start, std::size_t end) { return start + (end - start) / 2; }

std::vector<Emission> ArgmaxRuns(const Posteriorgram& pg, bool blanks) {
  pg.Validate();
  std::vector<Emission> runs;
  const std::size_t blank = pg.blank_index();
  std::size_t t = 0;
  while (t < pg.size()) {
    const std::size_t label = pg.Argmax(t);
    std::size_t end = t;
    while (end + 1 < pg.size() && pg.Argmax(end + 1) == label) ++end;
    if ((label == blank) == blanks) {
      runs.push_back({pg.phones[label], t, end, MidFrame(t, end), false});
    }
    t = end + 1;
  }
  return runs;
}

std::string Where(std::size_t line) { return "line " + std::to_string(line) + ": "; }

}  // namespace

void Posteriorgram::Validate() const {
  if (phones.size() < 2 || phones.back() != kBlankSymbol) {
    Fail(ErrorCode::kInvalidPosteriorgram,
         "inventory needs at least one phone followed by " + std::string(kBlankSymbol));
  }
  if (!(hop_ms > 0.0)) Fail(ErrorCode::kInvalidPosteriorgram, "hop_ms must be positive");
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const auto& row = rows[t];
    if (row.size() != phones.size()) {
      Fail(ErrorCode::kInvalidPosteriorgram, "frame " + std::to_string(t) + ": width mismatch");
    }
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0 && p <= 1.0)) {
        Fail(ErrorCode::kInvalidPosteriorgram,
             "frame " + std::to_string(t) + ": probability outside [0, 1]");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      Fail(ErrorCode::kInvalidPosteriorgram,
           "frame " + std::to_string(t) + ": row sums to " + FormatShortest(sum));
    }
  }
}

std::size_t Posteriorgram::Argmax(std::size_t frame) const {
  const auto& row = rows.at(frame);
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

std::vector<Emission> GreedyEmissions(const Posteriorgram& pg) { return ArgmaxRuns(pg, false); }

std::vector<Emission> BlankRuns(const Posteriorgram& pg) { return ArgmaxRuns(pg, true); }

std::vector<Emission> InsertPauses(std::span<const Emission> emissions,
                                   std::span<const Emission> blank_runs, double hop_ms,
                                   double threshold_ms) {
  std::vector<Emission> tokens(emissions.begin(), emissions.end());
  for (const auto& run : blank_runs) {
    if (static_cast<double>(run.run_length()) * hop_ms > threshold_ms) {
      tokens.push_back({std::string(kPauseSymbol), run.run_start, run.run_end,
                        MidFrame(run.run_start, run.run_end), true});
    }
  }
  std::stable_sort(tokens.begin(), tokens.end(), [](const Emission& a, const Emission& b) {
    return a.run_start < b.run_start;
  });
  for (std::size_t k = 1; k < tokens.size(); ++k) {
    if (tokens[k].run_start <= tokens[k - 1].run_end) {
      Fail(ErrorCode::kInvalidArgument, "emission and blank runs overlap at frame " +
                                            std::to_string(tokens[k].run_start));
    }
  }
  return tokens;
}

std::vector<Emission> TextlessTokens(const Posteriorgram& pg, double threshold_ms) {
  return InsertPauses(GreedyEmissions(pg), BlankRuns(pg), pg.hop_ms, threshold_ms);
}

std::vector<TextlessRefVector> TextlessRawFeatures(std::span<const Emission> tokens,
                                                   const PitchTrack& pitch,
                                                   const CepstralTrack& ceps,
                                                   const Posteriorgram& pg) {
  const AggregateOptions options;
  CheckTrackConsistency(pitch, ceps, static_cast<double>(pg.size()) * pg.hop_ms / 1000.0,
                        options.frame_tolerance);
  if (pg.hop_ms != pitch.hop_ms) {
    Fail(ErrorCode::kTrackAlignmentMismatch, "posteriorgram hop differs from track hop");
  }
  const std::size_t n = std::min(pitch.size(), ceps.size());
  const double hop = pg.hop_ms;

  double utt_sum = 0.0;
  std::size_t utt_voiced = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (pitch.voiced[t]) {
      utt_sum += pitch.f0_hz[t];
      ++utt_voiced;
    }
  }

  std::vector<TextlessRefVector> out;
  out.reserve(tokens.size());
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const Emission& tok = tokens[k];
    if (tok.rep_frame >= pg.size()) {
      Fail(ErrorCode::kTrackAlignmentMismatch, "token beyond posteriorgram end");
    }
    TextlessRefVector v;
    v.phone = tok.phone;
    v.is_pau = tok.is_pau;
    v.rep_frame = tok.rep_frame;
    v.posterior_row = pg.rows[tok.rep_frame];

    const std::size_t lo = std::min(tok.run_start, n - 1);
    const std::size_t hi = std::min(tok.run_end, n - 1);
    double f0_sum = 0.0, c0_sum = 0.0;
    std::size_t voiced = 0;
    for (std::size_t t = lo; t <= hi; ++t) {
      c0_sum += ceps.frames[t][0];
      if (pitch.voiced[t]) {
        f0_sum += pitch.f0_hz[t];
        ++voiced;
      }
    }
    v.mgc0 = c0_sum / static_cast<double>(hi - lo + 1);
    if (voiced > 0) {
      v.f0 = f0_sum / static_cast<double>(voiced);
      v.f0_source = F0Source::kState;
    } else if (utt_voiced > 0) {
      v.f0 = utt_sum / static_cast<double>(utt_voiced);
      v.f0_source = F0Source::kUtterance;
    } else {
      v.f0 = 0.0;
      v.f0_source = F0Source::kMissing;
    }

    // Distances between frame centres, computed in whole frames so that
    // neighbouring tokens share bit-identical values.
    if (k == 0) {
      v.d_prev_s = static_cast<double>(2 * tok.rep_frame + 1) * hop / 2000.0;
    } else {
      v.d_prev_s = static_cast<double>(tok.rep_frame - tokens[k - 1].rep_frame) * hop / 1000.0;
    }
    if (k + 1 == tokens.size()) {
      v.d_next_s = static_cast<double>(2 * pg.size() - 2 * tok.rep_frame - 1) * hop / 2000.0;
    } else {
      v.d_next_s = static_cast<double>(tokens[k + 1].rep_frame - tok.rep_frame) * hop / 1000.0;
    }
    v.d_prev = v.d_prev_s;
    v.d_next = v.d_next_s;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<TextlessRefVector> AggregateTextless(std::span<const Emission> tokens,
                                                 const PitchTrack& pitch,
                                                 const CepstralTrack& ceps,
                                                 const Posteriorgram& pg,
                                                 const SpeakerStats& stats) {
  auto out = TextlessRawFeatures(tokens, pitch, ceps, pg);
  auto z = [](double x, const Moments& m) { return (x - m.mean) / std::sqrt(m.var); };
  for (auto& v : out) {
    v.f0 = v.f0_source == F0Source::kMissing ? 0.0 : z(v.f0, stats.f0_pooled);
    v.mgc0 = z(v.mgc0, stats.mgc0_pooled);
    v.d_prev = z(ScaleDuration(v.d_prev_s, stats.duration_scale), stats.duration_global);
    v.d_next = z(ScaleDuration(v.d_next_s, stats.duration_scale), stats.duration_global);
  }
  return out;
}

SpeakerStats CollectTextlessStats(std::span<const std::vector<TextlessRefVector>> raw_corpus) {
  if (raw_corpus.empty()) Fail(ErrorCode::kEmptyCorpus, "no utterances");
  std::vector<double> f0, mgc0, dist;
  for (const auto& utt : raw_corpus) {
    for (const auto& v : utt) {
      if (v.f0_source == F0Source::kState) f0.push_back(v.f0);
      mgc0.push_back(v.mgc0);
      dist.push_back(v.d_prev_s);
    }
    if (!utt.empty()) dist.push_back(utt.back().d_next_s);
  }
  SpeakerStats stats;
  stats.f0_pooled = ComputeMoments(f0);
  stats.mgc0_pooled = ComputeMoments(mgc0);
  stats.f0.fill(stats.f0_pooled);
  stats.mgc0.fill(stats.mgc0_pooled);
  stats.duration_global = ComputeMoments(dist);
  return stats;
}

std::string PosteriorgramToCsv(const Posteriorgram& pg) {
  std::string out;
  for (std::size_t i = 0; i < pg.phones.size(); ++i) {
    if (i) out += ',';
    out += pg.phones[i];
  }
  out += '\n';
  for (const auto& row : pg.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += FormatShortest(row[i]);
    }
    out += '\n';
  }
  return out;
}

Posteriorgram PosteriorgramFromCsv(std::string_view text, double hop_ms) {
  auto lines = SplitLines(text);
  if (lines.empty()) Fail(ErrorCode::kInvalidPosteriorgram, "empty posteriorgram file");
  Posteriorgram pg;
  pg.hop_ms = hop_ms;
  for (auto f : SplitFields(lines[0], ',')) pg.phones.emplace_back(Trim(f));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    std::vector<double> row;
    for (auto f : SplitFields(lines[i], ',')) {
      auto p = ParseDouble(f);
      if (!p) Fail(ErrorCode::kMalformedLine, Where(i + 1) + "bad probability '" + std::string(f) + "'");
      row.push_back(*p);
    }
    if (row.size() != pg.phones.size()) {
      Fail(ErrorCode::kMalformedLine, Where(i + 1) + "row width differs from header");
    }
    pg.rows.push_back(std::move(row));
  }
  pg.Validate();
  return pg;
}

std::string PosteriorgramSidecarJson(double hop_ms) {
  return nlohmann::json{{"hop_ms", hop_ms}}.dump() + "\n";
}

double HopFromSidecarJson(std::string_view text) {
  try {
    return nlohmann::json::parse(text).at("hop_ms").get<double>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("posteriorgram sidecar: ") + e.what());
  }
}

std::string TextlessToCsv(std::span<const TextlessRefVector> vectors) {
  std::string out(kTextlessHeader);
  out += '\n';
  for (const auto& v : vectors) {
    out += v.phone + ',' + (v.is_pau ? "1" : "0") + ',' + std::to_string(v.rep_frame);
    for (double x : {v.f0, v.mgc0, v.d_prev, v.d_next, v.d_prev_s, v.d_next_s}) {
      out += ',' + FormatShortest(x);
    }
    out += ',';
    out += static_cast<char>(v.f0_source);
    out += ',';
    for (std::size_t i = 0; i < v.posterior_row.size(); ++i) {
      if (i) out += ';';
      out += FormatShortest(v.posterior_row[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<TextlessRefVector> TextlessFromCsv(std::string_view text) {
  auto lines = SplitLines(text);
  if (lines.empty() || Trim(lines[0]) != kTextlessHeader) {
    Fail(ErrorCode::kMalformedLine, "line 1: expected text-less header");
  }
  std::vector<TextlessRefVector> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    auto f = SplitFields(lines[i], ',');
    const std::string where = Where(i + 1);
    if (f.size() != 11) Fail(ErrorCode::kMalformedLine, where + "expected 11 fields");
    TextlessRefVector v;
    v.phone = std::string(Trim(f[0]));
    if (f[1] != "0" && f[1] != "1") Fail(ErrorCode::kMalformedLine, where + "is_pau must be 0/1");
    v.is_pau = f[1] == "1";
    auto rep = ParseInt(f[2]);
    if (!rep || *rep < 0) Fail(ErrorCode::kMalformedLine, where + "bad rep_frame");
    v.rep_frame = static_cast<std::size_t>(*rep);
    double* targets[] = {&v.f0, &v.mgc0, &v.d_prev, &v.d_next, &v.d_prev_s, &v.d_next_s};
    for (int k = 0; k < 6; ++k) {
      auto x = ParseDouble(f[3 + k]);
      if (!x) Fail(ErrorCode::kMalformedLine, where + "bad number");
      *targets[k] = *x;
    }
    const std::string_view flag = Trim(f[9]);
    if (flag.size() != 1 || std::string_view("spux").find(flag[0]) == std::string_view::npos) {
      Fail(ErrorCode::kMalformedLine, where + "bad f0_flag");
    }
    v.f0_source = static_cast<F0Source>(flag[0]);
    for (auto p : SplitFields(f[10], ';')) {
      auto x = ParseDouble(p);
      if (!x) Fail(ErrorCode::kMalformedLine, where + "bad posterior value");
      v.posterior_row.push_back(*x);
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace prosoref
