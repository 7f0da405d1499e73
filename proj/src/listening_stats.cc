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

#include "prosoref/listening_stats.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include <boost/math/special_functions/beta.hpp>

#include "json.hpp"

#include "prosoref/error.h"
#include "prosoref/text_format.h"

namespace prosoref {
namespace {

using nlohmann::json;
using Block = std::pair<std::string, std::string>;

// Blocks in order of first appearance with their per-system scores.
std::vector<std::pair<Block, std::map<std::string, double>>> Blocks(const MushraScores& scores) {
  std::vector<std::pair<Block, std::map<std::string, double>>> blocks;
  std::map<Block, std::size_t> index;
  for (const auto& r : scores.ratings) {
    Block key{r.listener, r.utterance};
    auto [it, inserted] = index.emplace(key, blocks.size());
    if (inserted) blocks.push_back({key, {}});
    blocks[it->second].second[r.system] = r.score;
  }
  return blocks;
}

std::vector<double> ScoresOf(const MushraScores& scores, const std::string& system) {
  std::vector<double> v;
  for (const auto& r : scores.ratings) {
    if (r.system == system) v.push_back(r.score);
  }
  return v;
}

double NormalTwoSided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace

void MushraScores::Validate() const {
  if (ratings.empty()) Fail(ErrorCode::kEmptyScores, "no ratings");
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (const auto& r : ratings) {
    if (!(r.score >= 0.0 && r.score <= 100.0)) {
      Fail(ErrorCode::kInvalidArgument, "score outside [0, 100] for listener " + r.listener);
    }
    if (!seen.insert({r.listener, r.utterance, r.system}).second) {
      Fail(ErrorCode::kInvalidArgument, "duplicate rating (" + r.listener + ", " + r.utterance +
                                            ", " + r.system + ")");
    }
  }
  for (const auto& [block, by_system] : Blocks(*this)) {
    if (by_system.size() != systems.size()) {
      Fail(ErrorCode::kInvalidArgument, "block (" + block.first + ", " + block.second +
                                            ") does not rate every system");
    }
  }
}

MushraScores MushraFromCsv(std::string_view text) {
  MushraScores scores;
  auto lines = SplitLines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty() || Trim(lines[i]).front() == '#') continue;
    auto f = SplitFields(lines[i], ',');
    const std::string where = "line " + std::to_string(i + 1) + ": ";
    if (f.size() != 4) Fail(ErrorCode::kMalformedLine, where + "expected listener,utterance,system,score");
    auto score = ParseDouble(f[3]);
    if (!score) {
      if (scores.ratings.empty() && Trim(f[3]) == "score") continue;  // header
      Fail(ErrorCode::kMalformedLine, where + "bad score '" + std::string(f[3]) + "'");
    }
    MushraRating r{std::string(Trim(f[0])), std::string(Trim(f[1])), std::string(Trim(f[2])), *score};
    if (std::find(scores.systems.begin(), scores.systems.end(), r.system) == scores.systems.end()) {
      scores.systems.push_back(r.system);
    }
    scores.ratings.push_back(std::move(r));
  }
  scores.Validate();
  return scores;
}

double Median(std::span<const double> values) {
  if (values.empty()) Fail(ErrorCode::kEmptyScores, "median of empty set");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double Quantile(std::span<const double> values, double q) {
  if (values.empty()) Fail(ErrorCode::kEmptyScores, "quantile of empty set");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<std::pair<std::string, double>> MushraMedians(const MushraScores& scores) {
  if (scores.ratings.empty()) Fail(ErrorCode::kEmptyScores, "no ratings");
  std::vector<std::pair<std::string, double>> out;
  for (const auto& s : scores.systems) out.emplace_back(s, Median(ScoresOf(scores, s)));
  return out;
}

std::vector<Quartiles> MushraQuartiles(const MushraScores& scores) {
  if (scores.ratings.empty()) Fail(ErrorCode::kEmptyScores, "no ratings");
  std::vector<Quartiles> out;
  for (const auto& s : scores.systems) {
    const auto v = ScoresOf(scores, s);
    out.push_back({s, Quantile(v, 0.0), Quantile(v, 0.25), Median(v), Quantile(v, 0.75),
                   Quantile(v, 1.0)});
  }
  return out;
}

std::string QuartilesToCsv(std::span<const Quartiles> rows) {
  std::string out = "system,min,q1,median,q3,max\n";
  for (const auto& r : rows) {
    out += r.system;
    for (double v : {r.min, r.q1, r.median, r.q3, r.max}) out += ',' + FormatShortest(v);
    out += '\n';
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> PairedSamples(const MushraScores& scores,
                                                                  std::string_view a,
                                                                  std::string_view b) {
  std::vector<double> x, y;
  for (const auto& [block, by_system] : Blocks(scores)) {
    auto ia = by_system.find(std::string(a));
    auto ib = by_system.find(std::string(b));
    if (ia != by_system.end() && ib != by_system.end()) {
      x.push_back(ia->second);
      y.push_back(ib->second);
    }
  }
  return {x, y};
}

WilcoxonResult WilcoxonSignedRank(std::span<const double> x, std::span<const double> y,
                                  const WilcoxonOptions& options) {
  if (x.size() != y.size()) Fail(ErrorCode::kLengthMismatch, "paired samples differ in length");
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != y[i]) d.push_back(x[i] - y[i]);
  }
  const std::size_t n = d.size();
  if (n < options.min_n) {
    Fail(ErrorCode::kDegenerateSample,
         std::to_string(n) + " non-zero differences, need " + std::to_string(options.min_n));
  }

  // Doubled midranks keep tied ranks integral.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return std::abs(d[i]) < std::abs(d[j]); });
  std::vector<std::uint64_t> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const std::uint64_t r2 = (i + 1) + (j + 1);
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
    const auto t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  std::uint64_t w2 = 0, total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (d[i] > 0) w2 += rank2[i];
  }

  WilcoxonResult res;
  res.n_used = n;
  res.w_plus = static_cast<double>(w2) / 2.0;
  if (n <= options.exact_max_n) {
    // counts[s] = number of sign assignments whose doubled W+ equals s.
    std::vector<std::uint64_t> counts(total2 + 1, 0);
    counts[0] = 1;
    std::uint64_t reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
      reach += rank2[i];
      for (std::uint64_t s = reach; s >= rank2[i]; --s) {
        counts[s] += counts[s - rank2[i]];
        if (s == rank2[i]) break;
      }
    }
    std::uint64_t le = 0, ge = 0;
    for (std::uint64_t s = 0; s <= total2; ++s) {
      if (s <= w2) le += counts[s];
      if (s >= w2) ge += counts[s];
    }
    const double all = std::ldexp(1.0, static_cast<int>(n));
    res.p = std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / all);
    res.exact = true;
    return res;
  }

  const auto nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  if (!(var > 0.0)) Fail(ErrorCode::kDegenerateSample, "signed-rank variance is zero");
  double dev = res.w_plus - mean;
  if (options.continuity_correction) {
    dev = std::abs(dev) <= 0.5 ? 0.0 : dev - std::copysign(0.5, dev);
  }
  res.p = std::min(1.0, NormalTwoSided(dev / std::sqrt(var)));
  return res;
}

double StudentTTwoSided(double t, double df) {
  if (!(df > 0.0)) Fail(ErrorCode::kInvalidArgument, "degrees of freedom must be positive");
  if (!std::isfinite(t)) return 0.0;
  // P(|T| >= |t|) = I_{df / (df + t^2)}(df / 2, 1 / 2).
  return boost::math::ibeta(df / 2.0, 0.5, df / (df + t * t));
}

PairedTResult PairedT(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) Fail(ErrorCode::kLengthMismatch, "paired samples differ in length");
  const std::size_t n = x.size();
  if (n < 2) Fail(ErrorCode::kTooFewSamples, "paired t-test needs at least 2 pairs");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += x[i] - y[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) ss += (x[i] - y[i] - mean) * (x[i] - y[i] - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) Fail(ErrorCode::kZeroVariance, "differences have zero variance");
  PairedTResult r;
  r.df = static_cast<double>(n - 1);
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p = StudentTTwoSided(r.t, r.df);
  return r;
}

HolmResult HolmCorrection(std::span<const double> pvals, double alpha) {
  for (double p : pvals) {
    if (!(p >= 0.0 && p <= 1.0)) Fail(ErrorCode::kInvalidP, "p-value outside [0, 1]");
  }
  const std::size_t m = pvals.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
  HolmResult res;
  res.reject.assign(m, false);
  res.adjusted.assign(m, 1.0);
  bool rejecting = true;
  double running = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double p = pvals[order[k]];
    const auto factor = static_cast<double>(m - k);
    if (rejecting && p <= alpha / factor) {
      res.reject[order[k]] = true;
    } else {
      rejecting = false;
    }
    running = std::max(running, std::min(1.0, factor * p));
    res.adjusted[order[k]] = running;
  }
  return res;
}

std::string MushraReportJson(const MushraScores& scores, const MushraReportOptions& options) {
  scores.Validate();
  json j;
  j["systems"] = scores.systems;
  j["medians"] = json::object();
  for (const auto& [s, med] : MushraMedians(scores)) j["medians"][s] = med;

  struct Comparison {
    std::string a, b;
    std::size_t n = 0;
    std::optional<WilcoxonResult> wilcoxon;
    std::string wilcoxon_error;
    std::optional<PairedTResult> t;
    std::string t_error;
  };
  std::vector<Comparison> comps;
  for (std::size_t i = 0; i < scores.systems.size(); ++i) {
    for (std::size_t k = i + 1; k < scores.systems.size(); ++k) {
      Comparison c;
      c.a = scores.systems[i];
      c.b = scores.systems[k];
      auto [x, y] = PairedSamples(scores, c.a, c.b);
      c.n = x.size();
      try {
        c.wilcoxon = WilcoxonSignedRank(x, y, options.wilcoxon);
      } catch (const Error& e) {
        c.wilcoxon_error = std::string(ErrorCodeName(e.code()));
      }
      try {
        c.t = PairedT(x, y);
      } catch (const Error& e) {
        c.t_error = std::string(ErrorCodeName(e.code()));
      }
      comps.push_back(std::move(c));
    }
  }

  // Holm runs over the comparisons that produced a p-value, per test family.
  auto family = [&](auto get_p) {
    std::vector<std::size_t> idx;
    std::vector<double> p;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      if (auto v = get_p(comps[c])) {
        idx.push_back(c);
        p.push_back(*v);
      }
    }
    std::vector<json> out(comps.size(), json(nullptr));
    for (double alpha : options.alphas) {
      const HolmResult h = HolmCorrection(p, alpha);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (out[idx[k]].is_null()) out[idx[k]] = json{{"adjusted_p", h.adjusted[k]}, {"reject", json::object()}};
        out[idx[k]]["reject"][FormatShortest(alpha)] = static_cast<bool>(h.reject[k]);
      }
    }
    return out;
  };
  auto holm_w = family([](const Comparison& c) -> std::optional<double> {
    return c.wilcoxon ? std::optional(c.wilcoxon->p) : std::nullopt;
  });
  auto holm_t = family([](const Comparison& c) -> std::optional<double> {
    return c.t ? std::optional(c.t->p) : std::nullopt;
  });

  j["comparisons"] = json::array();
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const auto& cmp = comps[c];
    json w = cmp.wilcoxon ? json{{"p", cmp.wilcoxon->p},
                                 {"w_plus", cmp.wilcoxon->w_plus},
                                 {"n_used", cmp.wilcoxon->n_used},
                                 {"exact", cmp.wilcoxon->exact},
                                 {"holm", holm_w[c]}}
                          : json{{"error", cmp.wilcoxon_error}};
    json t = cmp.t ? json{{"p", cmp.t->p}, {"t", cmp.t->t}, {"df", cmp.t->df}, {"holm", holm_t[c]}}
                   : json{{"error", cmp.t_error}};
    j["comparisons"].push_back(
        {{"a", cmp.a}, {"b", cmp.b}, {"n_pairs", cmp.n}, {"wilcoxon", w}, {"t_test", t}});
  }
  return j.dump(2) + "\n";
}

}  // namespace prosoref
