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

#include "prosoref/objective_eval.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "prosoref/text_format.h"

namespace prosoref {
namespace {

using nlohmann::json;

double Euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

json OptionalJson(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json MeanSdJson(const MeanSd& m) {
  return json{{"mean", m.mean}, {"sd", m.sd}, {"count", m.count}};
}

std::string PadRight(const std::string& s, std::size_t width) {
  // Column widths count code points so "±" lines up.
  std::size_t cps = 0;
  for (unsigned char c : s) cps += (c & 0xC0) != 0x80;
  return s + std::string(width > cps ? width - cps : 0, ' ');
}

std::size_t CodePoints(const std::string& s) {
  std::size_t cps = 0;
  for (unsigned char c : s) cps += (c & 0xC0) != 0x80;
  return cps;
}

}  // namespace

bool WarpPath::IsValid(std::size_t a_len, std::size_t b_len) const {
  if (steps.empty() || a_len == 0 || b_len == 0) return false;
  if (steps.front() != std::pair<std::size_t, std::size_t>{0, 0}) return false;
  if (steps.back() != std::pair<std::size_t, std::size_t>{a_len - 1, b_len - 1}) return false;
  for (std::size_t k = 1; k < steps.size(); ++k) {
    const auto di = steps[k].first - steps[k - 1].first;
    const auto dj = steps[k].second - steps[k - 1].second;
    if (steps[k].first < steps[k - 1].first || steps[k].second < steps[k - 1].second) return false;
    if (di > 1 || dj > 1 || (di == 0 && dj == 0)) return false;
  }
  return true;
}

DtwResult Dtw(const FrameSequence& a, const FrameSequence& b) {
  if (a.empty() || b.empty()) Fail(ErrorCode::kEmptySequence, "DTW needs non-empty sequences");
  const std::size_t dim = a.front().size();
  for (const auto& v : a) {
    if (v.size() != dim) Fail(ErrorCode::kDimMismatch, "frames of A differ in size");
  }
  for (const auto& v : b) {
    if (v.size() != dim) Fail(ErrorCode::kDimMismatch, "frames of B do not match A");
  }
  const std::size_t n = a.size(), m = b.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> acc(n * m, kInf);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return acc[i * m + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = Euclidean(a[i], b[j]);
      if (i == 0 && j == 0) {
        at(i, j) = d;
        continue;
      }
      double best = kInf;
      if (i > 0 && j > 0) best = std::min(best, at(i - 1, j - 1));
      if (i > 0) best = std::min(best, at(i - 1, j));
      if (j > 0) best = std::min(best, at(i, j - 1));
      at(i, j) = best + d;
    }
  }

  DtwResult result;
  result.cost = at(n - 1, m - 1);
  std::size_t i = n - 1, j = m - 1;
  result.path.steps.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const double diag = at(i - 1, j - 1), up = at(i - 1, j), left = at(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    } else if (i > 0) {
      --i;
    } else {
      --j;
    }
    result.path.steps.emplace_back(i, j);
  }
  std::reverse(result.path.steps.begin(), result.path.steps.end());
  return result;
}

std::vector<F0Pair> AlignF0(const WarpPath& path, const PitchTrack& ref, const PitchTrack& syn) {
  if (path.steps.empty()) Fail(ErrorCode::kLengthMismatch, "empty warp path");
  const auto [ie, je] = path.steps.back();
  if (ie + 1 != ref.size() || je + 1 != syn.size()) {
    Fail(ErrorCode::kLengthMismatch,
         "path ends at (" + std::to_string(ie) + ", " + std::to_string(je) + ") but tracks have " +
             std::to_string(ref.size()) + " and " + std::to_string(syn.size()) + " frames");
  }
  std::vector<F0Pair> pairs;
  pairs.reserve(path.steps.size());
  for (const auto& [i, j] : path.steps) {
    if (i >= ref.size() || j >= syn.size()) Fail(ErrorCode::kLengthMismatch, "path leaves tracks");
    pairs.push_back({ref.f0_hz[i], ref.voiced[i], syn.f0_hz[j], syn.voiced[j]});
  }
  return pairs;
}

EvalReport F0Metrics(std::span<const F0Pair> pairs, double gross_threshold) {
  if (pairs.empty()) Fail(ErrorCode::kEmptySequence, "no F0 pairs");
  EvalReport report;
  report.n_frames = pairs.size();
  std::size_t errors = 0;
  std::vector<double> ref, syn;
  for (const auto& p : pairs) {
    if (p.ref_voiced != p.syn_voiced) {
      ++errors;
    } else if (p.ref_voiced) {
      ref.push_back(p.ref_f0);
      syn.push_back(p.syn_f0);
      if (std::abs(p.syn_f0 - p.ref_f0) / p.ref_f0 > gross_threshold) ++errors;
    }
  }
  report.ffe_pct = 100.0 * static_cast<double>(errors) / static_cast<double>(pairs.size());
  report.n_voiced_pairs = ref.size();
  if (ref.empty()) {
    report.issues.push_back(ErrorCode::kNoVoicedOverlap);
    return report;
  }

  const auto n = static_cast<double>(ref.size());
  double se = 0.0, mr = 0.0, ms = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    se += (syn[k] - ref[k]) * (syn[k] - ref[k]);
    mr += ref[k];
    ms += syn[k];
  }
  report.rmse_hz = std::sqrt(se / n);
  mr /= n;
  ms /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    sxy += (ref[k] - mr) * (syn[k] - ms);
    sxx += (ref[k] - mr) * (ref[k] - mr);
    syy += (syn[k] - ms) * (syn[k] - ms);
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    report.issues.push_back(ErrorCode::kZeroVariance);
  } else {
    report.corr = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  }
  return report;
}

EvalReport EvaluateUtterance(const UtterancePair& pair, double gross_threshold) {
  const DtwResult dtw = Dtw(pair.ref_ceps.frames, pair.syn_ceps.frames);
  const auto pairs = AlignF0(dtw.path, pair.ref_pitch, pair.syn_pitch);
  return F0Metrics(pairs, gross_threshold);
}

MeanSd SummarizeValues(std::span<const double> values) {
  MeanSd m;
  m.count = values.size();
  if (values.empty()) return m;
  for (double v : values) m.mean += v;
  m.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.sd = std::sqrt(ss / static_cast<double>(values.size()));
  return m;
}

CorpusSummary SummarizeReports(std::vector<std::string> ids, std::vector<EvalReport> reports) {
  if (reports.empty()) Fail(ErrorCode::kEmptyCorpus, "no utterance pairs");
  std::vector<double> rmse, corr, ffe;
  for (const auto& r : reports) {
    if (r.rmse_hz) rmse.push_back(*r.rmse_hz);
    if (r.corr) corr.push_back(*r.corr);
    ffe.push_back(r.ffe_pct);
  }
  CorpusSummary s;
  s.rmse_hz = SummarizeValues(rmse);
  s.corr = SummarizeValues(corr);
  s.ffe_pct = SummarizeValues(ffe);
  s.ids = std::move(ids);
  s.reports = std::move(reports);
  return s;
}

CorpusSummary EvaluateCorpus(std::span<const UtterancePair> pairs, double gross_threshold) {
  if (pairs.empty()) Fail(ErrorCode::kEmptyCorpus, "no utterance pairs");
  std::vector<std::string> ids;
  std::vector<EvalReport> reports;
  for (const auto& p : pairs) {
    ids.push_back(p.id);
    reports.push_back(EvaluateUtterance(p, gross_threshold));
  }
  return SummarizeReports(std::move(ids), std::move(reports));
}

std::string FormatMeanSd(const MeanSd& m, int decimals) {
  return FormatFixed(m.mean, decimals) + " ± " + FormatFixed(m.sd, decimals);
}

std::string CorpusSummaryToJson(const CorpusSummary& summary) {
  json j;
  j["utterances"] = json::array();
  for (std::size_t k = 0; k < summary.reports.size(); ++k) {
    const auto& r = summary.reports[k];
    json issues = json::array();
    for (auto code : r.issues) issues.push_back(std::string(ErrorCodeName(code)));
    j["utterances"].push_back({{"id", k < summary.ids.size() ? summary.ids[k] : ""},
                               {"rmse_hz", OptionalJson(r.rmse_hz)},
                               {"corr", OptionalJson(r.corr)},
                               {"ffe_pct", r.ffe_pct},
                               {"n_frames", r.n_frames},
                               {"n_voiced_pairs", r.n_voiced_pairs},
                               {"issues", issues}});
  }
  j["summary"] = {{"rmse_hz", MeanSdJson(summary.rmse_hz)},
                  {"corr", MeanSdJson(summary.corr)},
                  {"ffe_pct", MeanSdJson(summary.ffe_pct)}};
  return j.dump(2) + "\n";
}

std::string RenderTable(std::span<const TableRow> rows) {
  const std::vector<std::string> header = {"Model", "Ref.", "RMSE (Hz)", "CORR", "FFE (%)"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : rows) {
    cells.push_back({row.model, row.ref, FormatMeanSd(row.summary.rmse_hz, 1),
                     FormatMeanSd(row.summary.corr, 2), FormatFixed(row.summary.ffe_pct.mean, 2)});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = CodePoints(header[c]);
    for (const auto& r : cells) width[c] = std::max(width[c], CodePoints(r[c]));
  }
  auto line = [&](const std::vector<std::string>& r) {
    std::string out = "|";
    for (std::size_t c = 0; c < r.size(); ++c) out += ' ' + PadRight(r[c], width[c]) + " |";
    return out + '\n';
  };
  std::string rule = "+";
  for (auto w : width) rule += std::string(w + 2, '-') + '+';
  rule += '\n';
  std::string out = rule + line(header) + rule;
  for (const auto& r : cells) out += line(r);
  return out + rule;
}

}  // namespace prosoref
