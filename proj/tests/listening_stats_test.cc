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

#include <algorithm>
#include <random>

#include "doctest.h"
#include "json.hpp"

#include "oracles.h"
#include "prosoref/error.h"
#include "prosoref/listening_stats.h"

namespace prosoref {
namespace {

template <typename F>
ErrorCode CodeOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIoError;
}

// Every listener rates every utterance on every system.
std::string RatingsCsv(const std::vector<std::pair<std::string, std::vector<double>>>& systems,
                       std::size_t listeners) {
  std::string csv = "listener,utterance,system,score\n";
  const std::size_t cells = systems.front().second.size();
  for (std::size_t c = 0; c < cells; ++c) {
    for (const auto& [name, scores] : systems) {
      csv += "L" + std::to_string(c % listeners) + ",u" + std::to_string(c / listeners) + "," + name +
             "," + std::to_string(scores[c]) + "\n";
    }
  }
  return csv;
}

TEST_CASE("median examples") {
  CHECK(Median(std::vector<double>{30, 30, 30}) == 30.0);
  CHECK(Median(std::vector<double>{10, 20, 30, 40}) == 25.0);
  CHECK(Median(std::vector<double>{7}) == 7.0);
  CHECK(CodeOf([] { Median(std::vector<double>{}); }) == ErrorCode::kEmptyScores);
}

TEST_CASE("quantiles interpolate between order statistics") {
  const std::vector<double> v = {40, 10, 30, 20};
  CHECK(Quantile(v, 0.0) == 10.0);
  CHECK(Quantile(v, 1.0) == 40.0);
  CHECK(Quantile(v, 0.25) == 17.5);
  CHECK(Quantile(v, 0.75) == 32.5);
  CHECK(Quantile(v, 0.5) == Median(v));
}

TEST_CASE("four-system medians") {
  const std::string csv = RatingsCsv({{"Base", {20, 30, 30, 40, 25, 35}},
                                      {"Agg", {55, 59, 59, 70, 50, 60}},
                                      {"VAE", {60, 66, 66, 80, 62, 70}},
                                      {"Ref", {70, 70, 70, 90, 65, 75}}},
                                     3);
  const MushraScores s = MushraFromCsv(csv);
  const auto med = MushraMedians(s);
  REQUIRE(med.size() == 4);
  CHECK(med[0] == std::pair<std::string, double>{"Base", 30.0});
  CHECK(med[1] == std::pair<std::string, double>{"Agg", 59.0});
  CHECK(med[2] == std::pair<std::string, double>{"VAE", 66.0});
  CHECK(med[3] == std::pair<std::string, double>{"Ref", 70.0});

  const auto q = MushraQuartiles(s);
  CHECK(q[0].min == 20.0);
  CHECK(q[0].max == 40.0);
  CHECK(QuartilesToCsv(q).substr(0, 54) == "system,min,q1,median,q3,max\nBase,20,26.25,30,33.75,40\n");
}

TEST_CASE("median ignores ordering and scales with affine maps") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 100);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + trial % 9);
    for (auto& x : v) x = u(rng);
    const double m = Median(v);
    std::shuffle(v.begin(), v.end(), rng);
    CHECK(Median(v) == m);
    for (auto& x : v) x = 0.5 * x + 3.0;
    CHECK(Median(v) == doctest::Approx(0.5 * m + 3.0).epsilon(1e-12));
  }
}

TEST_CASE("wilcoxon rejects samples with no differences") {
  const std::vector<double> x = {50, 60, 70, 80, 90, 40};
  CHECK(CodeOf([&] { WilcoxonSignedRank(x, x); }) == ErrorCode::kDegenerateSample);
  CHECK(CodeOf([&] { WilcoxonSignedRank(x, std::vector<double>{1, 2}); }) == ErrorCode::kLengthMismatch);
}

TEST_CASE("wilcoxon on six positive differences") {
  const std::vector<double> x = {11, 22, 33, 44, 55, 66};
  const std::vector<double> y = {10, 20, 30, 40, 50, 60};
  const WilcoxonResult r = WilcoxonSignedRank(x, y);
  CHECK(r.exact);
  CHECK(r.n_used == 6);
  CHECK(r.w_plus == 21.0);
  CHECK(r.p == 2.0 / 64.0);
}

TEST_CASE("exact wilcoxon equals sign enumeration") {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> n_dist(5, 12), score(0, 10);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x, y;
    // Small integer scores produce ties and zero differences.
    while (true) {
      x.clear();
      y.clear();
      const int n = n_dist(rng);
      for (int i = 0; i < n; ++i) {
        x.push_back(score(rng));
        y.push_back(score(rng));
      }
      std::size_t nz = 0;
      for (std::size_t i = 0; i < x.size(); ++i) nz += x[i] != y[i];
      if (nz >= 5) break;
    }
    const WilcoxonResult r = WilcoxonSignedRank(x, y);
    CHECK(r.exact);
    CHECK(r.p == oracle::WilcoxonEnumerationP(x, y));
    CHECK(WilcoxonSignedRank(y, x).p == r.p);
  }
}

TEST_CASE("large-sample wilcoxon under the null") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(50, 10);
  std::vector<double> x(50), y(50);
  for (std::size_t i = 0; i < 50; ++i) {
    const double base = g(rng);
    x[i] = base + 0.1 * g(rng);
    y[i] = base + 0.1 * g(rng);
  }
  const WilcoxonResult r = WilcoxonSignedRank(x, y);
  CHECK_FALSE(r.exact);
  CHECK(r.p > 0.05);
  CHECK(r.p <= 1.0);

  // The normal approximation near the exact boundary stays close to the exact value.
  std::vector<double> a(12), b(12, 0.0);
  for (std::size_t i = 0; i < 12; ++i) a[i] = (i % 3 == 0 ? -1.0 : 1.0) * static_cast<double>(i + 1);
  const double exact = WilcoxonSignedRank(a, b).p;
  WilcoxonOptions approx;
  approx.exact_max_n = 0;
  CHECK(WilcoxonSignedRank(a, b, approx).p == doctest::Approx(exact).epsilon(0.1));
}

TEST_CASE("paired t-test") {
  const std::vector<double> d = {1, 2, 3, 4};
  const std::vector<double> zero(4, 0.0);
  const PairedTResult r = PairedT(d, zero);
  CHECK(r.df == 3.0);
  CHECK(r.t == doctest::Approx(3.872983346207417).epsilon(1e-12));
  CHECK(std::abs(r.p - 0.0305) < 1e-3);
  CHECK(r.p == doctest::Approx(oracle::StudentTTwoSidedSimpson(r.t, r.df)).epsilon(1e-8));

  CHECK(CodeOf([] { PairedT(std::vector<double>{1, 2, 3}, std::vector<double>{0, 1, 2}); }) ==
        ErrorCode::kZeroVariance);
  CHECK(CodeOf([] { PairedT(std::vector<double>{1}, std::vector<double>{0}); }) == ErrorCode::kTooFewSamples);

  std::vector<double> sym, base;
  for (int i = 1; i <= 100; ++i) {
    sym.push_back(i % 2 ? i : -i + 1);
    base.push_back(0.0);
  }
  sym.push_back(-0.5);
  base.push_back(0.0);
  CHECK(PairedT(sym, base).p > 0.9);
}

TEST_CASE("student t tail against numerical integration") {
  for (double df : {1.0, 2.5, 7.0, 30.0}) {
    for (double t : {0.0, 0.3, 1.0, 2.2, 5.0}) {
      CHECK(StudentTTwoSided(t, df) == doctest::Approx(oracle::StudentTTwoSidedSimpson(t, df)).epsilon(1e-7));
      CHECK(StudentTTwoSided(-t, df) == StudentTTwoSided(t, df));
    }
  }
  CHECK(StudentTTwoSided(0.0, 4.0) == doctest::Approx(1.0));
}

TEST_CASE("holm examples") {
  const HolmResult a = HolmCorrection(std::vector<double>{0.01, 0.04}, 0.05);
  CHECK(a.reject == std::vector<bool>{true, true});
  CHECK(a.adjusted[0] == 0.02);
  CHECK(a.adjusted[1] == 0.04);
  const HolmResult b = HolmCorrection(std::vector<double>{0.03, 0.04}, 0.05);
  CHECK(b.reject == std::vector<bool>{false, false});
  CHECK(HolmCorrection(std::vector<double>{}, 0.05).reject.empty());
  CHECK(CodeOf([] { HolmCorrection(std::vector<double>{0.2, 1.5}); }) == ErrorCode::kInvalidP);
  CHECK(CodeOf([] { HolmCorrection(std::vector<double>{-0.1}); }) == ErrorCode::kInvalidP);
}

TEST_CASE("holm properties") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 0.2);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> p(1 + trial % 8);
    for (auto& x : p) x = u(rng);
    const HolmResult lo = HolmCorrection(p, 0.01);
    const HolmResult hi = HolmCorrection(p, 0.05);
    std::vector<std::size_t> order(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] < p[b]; });
    // Rejections form a prefix of the sorted p-values.
    bool stopped = false;
    for (std::size_t k : order) {
      if (!hi.reject[k]) stopped = true;
      if (stopped) CHECK_FALSE(hi.reject[k]);
    }
    double prev = 0.0;
    for (std::size_t k : order) {
      CHECK(hi.adjusted[k] >= prev);
      CHECK(hi.adjusted[k] >= p[k]);
      CHECK(hi.adjusted[k] <= 1.0);
      prev = hi.adjusted[k];
      // Larger alpha never removes a rejection.
      if (lo.reject[k]) CHECK(hi.reject[k]);
      CHECK(hi.reject[k] == (hi.adjusted[k] <= 0.05));
    }
  }
}

TEST_CASE("score parsing and validation") {
  const MushraScores s = MushraFromCsv("# comment\nlistener,utterance,system,score\nL1,u1,A,50\nL1,u1,B,60\n");
  CHECK(s.systems == std::vector<std::string>{"A", "B"});
  CHECK(s.ratings.size() == 2);
  CHECK(CodeOf([] { MushraFromCsv("L1,u1,A,101\n"); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { MushraFromCsv("L1,u1,A,50\nL1,u1,A,40\n"); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { MushraFromCsv("L1,u1,A,50\nL1,u1,B,40\nL2,u1,A,30\n"); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { MushraFromCsv("L1,u1,A\n"); }) == ErrorCode::kMalformedLine);
  CHECK(CodeOf([] { MushraFromCsv("L1,u1,A,x\n"); }) == ErrorCode::kMalformedLine);
  CHECK(CodeOf([] { MushraFromCsv("listener,utterance,system,score\n"); }) == ErrorCode::kEmptyScores);
}

TEST_CASE("pairing follows the rating blocks") {
  const MushraScores s = MushraFromCsv("L1,u1,A,10\nL1,u1,B,11\nL2,u1,B,21\nL2,u1,A,20\nL1,u2,A,30\nL1,u2,B,31\n");
  const auto [x, y] = PairedSamples(s, "A", "B");
  CHECK(x == std::vector<double>{10, 20, 30});
  CHECK(y == std::vector<double>{11, 21, 31});
}

TEST_CASE("report lists every pairwise comparison") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> u(0, 30);
  std::vector<double> a, b, c;
  for (int i = 0; i < 20; ++i) {
    a.push_back(20 + u(rng));
    b.push_back(60 + u(rng));
    c.push_back(61 + u(rng));
  }
  const MushraScores s = MushraFromCsv(RatingsCsv({{"A", a}, {"B", b}, {"C", c}}, 4));
  const auto j = nlohmann::json::parse(MushraReportJson(s));
  REQUIRE(j["comparisons"].size() == 3);
  CHECK(j["comparisons"][0]["a"] == "A");
  CHECK(j["comparisons"][0]["b"] == "B");
  CHECK(j["comparisons"][0]["n_pairs"] == 20);
  CHECK(j["comparisons"][0]["wilcoxon"]["holm"]["reject"]["0.05"] == true);
  CHECK(j["comparisons"][0]["t_test"]["p"].get<double>() < 1e-6);
  CHECK(j["medians"].contains("C"));
  CHECK(MushraReportJson(s) == MushraReportJson(s));
}

}  // namespace
}  // namespace prosoref
