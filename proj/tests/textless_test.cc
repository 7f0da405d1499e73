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

#include "prosoref/error.h"
#include "prosoref/textless.h"

namespace prosoref {
namespace {

const std::vector<std::string> kInventory = {"AH", "T", "S", "<blank>"};

// One row per label; the named label gets `peak`, the rest share the
// remainder with seeded jitter.
Posteriorgram FromLabels(const std::vector<std::string>& labels, std::uint64_t seed = 1,
                         double peak = 0.7) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Posteriorgram pg;
  pg.phones = kInventory;
  for (const auto& l : labels) {
    const auto at = static_cast<std::size_t>(
        std::find(kInventory.begin(), kInventory.end(), l) - kInventory.begin());
    std::vector<double> row(kInventory.size());
    double rest = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i != at) rest += (row[i] = u(rng));
    }
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = i == at ? peak : row[i] / rest * (1.0 - peak);
    pg.rows.push_back(std::move(row));
  }
  return pg;
}

std::vector<std::string> Repeat(const std::string& label, std::size_t n) {
  return std::vector<std::string>(n, label);
}

std::vector<std::string> Cat(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// Reference collapse: walk the argmax labels once, open a run on every
// label change, drop blank runs.
std::vector<std::pair<std::size_t, std::size_t>> CollapseOracle(const std::vector<std::string>& labels) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (t == 0 || labels[t] != labels[t - 1]) runs.push_back({t, t});
    runs.back().second = t;
  }
  std::erase_if(runs, [&](const auto& r) { return labels[r.first] == "<blank>"; });
  return runs;
}

TEST_CASE("greedy collapse of argmax runs") {
  const auto e = GreedyEmissions(FromLabels({"<blank>", "<blank>", "AH", "AH", "<blank>", "T"}));
  REQUIRE(e.size() == 2);
  CHECK(e[0].phone == "AH");
  CHECK(e[0].run_start == 2);
  CHECK(e[0].run_end == 3);
  CHECK(e[0].rep_frame == 2);
  CHECK(e[1].phone == "T");
  CHECK(e[1].run_start == 5);
  CHECK(e[1].run_end == 5);
  CHECK(e[1].rep_frame == 5);

  CHECK(GreedyEmissions(FromLabels(Repeat("<blank>", 7))).empty());
  const auto twice = GreedyEmissions(FromLabels({"AH", "<blank>", "AH"}));
  REQUIRE(twice.size() == 2);
  CHECK(twice[0].phone == "AH");
  CHECK(twice[1].phone == "AH");
}

TEST_CASE("collapse agrees with the reference walk on random label strings") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(0, 3), len(1, 60);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> labels(len(rng));
    for (auto& l : labels) l = kInventory[pick(rng)];
    const auto e = GreedyEmissions(FromLabels(labels, trial));
    const auto runs = CollapseOracle(labels);
    REQUIRE(e.size() == runs.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
      CHECK(e[k].run_start == runs[k].first);
      CHECK(e[k].run_end == runs[k].second);
      CHECK(e[k].phone == labels[runs[k].first]);
      CHECK(e[k].run_start <= e[k].rep_frame);
      CHECK(e[k].rep_frame <= e[k].run_end);
    }
  }
}

TEST_CASE("emissions depend only on row argmax") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> pick(0, 3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> labels(40);
    for (auto& l : labels) l = kInventory[pick(rng)];
    const auto a = GreedyEmissions(FromLabels(labels, 1000 + trial, 0.9));
    const auto b = GreedyEmissions(FromLabels(labels, 2000 + trial, 0.55));
    CHECK(a == b);
  }
}

TEST_CASE("blank runs longer than the threshold become pauses") {
  const auto long_gap = TextlessTokens(FromLabels(Cat({Repeat("AH", 3), Repeat("<blank>", 25), Repeat("T", 3)})));
  REQUIRE(long_gap.size() == 3);
  CHECK(long_gap[1].phone == "pau");
  CHECK(long_gap[1].is_pau);
  CHECK(long_gap[1].run_start == 3);
  CHECK(long_gap[1].run_end == 27);
  CHECK(long_gap[1].rep_frame == 15);

  const auto short_gap = TextlessTokens(FromLabels(Cat({Repeat("AH", 3), Repeat("<blank>", 15), Repeat("T", 3)})));
  CHECK(short_gap.size() == 2);
  // Exactly 200 ms is not strictly longer.
  CHECK(TextlessTokens(FromLabels(Cat({Repeat("AH", 3), Repeat("<blank>", 20), Repeat("T", 3)}))).size() == 2);

  const auto leading = TextlessTokens(FromLabels(Cat({Repeat("<blank>", 25), Repeat("AH", 3), Repeat("T", 3)})));
  REQUIRE(leading.size() == 3);
  CHECK(leading[0].is_pau);
  CHECK(leading[1].phone == "AH");
}

TEST_CASE("pause insertion neither loses nor duplicates emissions") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> pick(0, 3), burst(1, 35);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> labels;
    while (labels.size() < 150) {
      const auto l = kInventory[pick(rng)];
      const auto n = static_cast<std::size_t>(burst(rng));
      labels.insert(labels.end(), n, l);
    }
    const Posteriorgram pg = FromLabels(labels, trial);
    const auto emissions = GreedyEmissions(pg);
    const auto blanks = BlankRuns(pg);
    const auto tokens = InsertPauses(emissions, blanks, pg.hop_ms);
    std::vector<Emission> kept, paus;
    for (const auto& t : tokens) (t.is_pau ? paus : kept).push_back(t);
    CHECK(kept == emissions);
    std::vector<Emission> long_blanks;
    for (const auto& b : blanks) {
      if (b.run_length() * pg.hop_ms > kPauseThresholdMs) long_blanks.push_back(b);
    }
    REQUIRE(paus.size() == long_blanks.size());
    for (std::size_t k = 0; k < paus.size(); ++k) {
      CHECK(paus[k].run_start == long_blanks[k].run_start);
      CHECK(paus[k].run_end == long_blanks[k].run_end);
    }
    for (std::size_t k = 1; k < tokens.size(); ++k) CHECK(tokens[k - 1].run_end < tokens[k].run_start);
  }
}

struct Utterance {
  Posteriorgram pg;
  PitchTrack pitch;
  CepstralTrack ceps;
};

Utterance WithTracks(Posteriorgram pg, const std::vector<double>& f0) {
  Utterance u{std::move(pg), {}, {}};
  for (std::size_t t = 0; t < u.pg.size(); ++t) {
    const double f = t < f0.size() ? f0[t] : 0.0;
    u.pitch.f0_hz.push_back(f);
    u.pitch.voiced.push_back(f > 0.0);
    u.ceps.frames.push_back({static_cast<double>(t), 0.0});
  }
  return u;
}

TEST_CASE("neighbour distances on the (5, 12, 20) fixture") {
  std::vector<std::string> labels = Repeat("<blank>", 30);
  labels[5] = "AH";
  labels[12] = "T";
  labels[20] = "S";
  const Utterance u = WithTracks(FromLabels(labels), {});
  const auto tokens = TextlessTokens(u.pg);
  REQUIRE(tokens.size() == 3);
  const auto v = TextlessRawFeatures(tokens, u.pitch, u.ceps, u.pg);
  CHECK(v[1].d_prev_s == 0.07);
  CHECK(v[1].d_next_s == 0.08);
  // Boundary tokens measure to the utterance edges from the frame centre.
  CHECK(v[0].d_prev_s == doctest::Approx(0.055).epsilon(1e-15));
  CHECK(v[2].d_next_s == doctest::Approx(0.095).epsilon(1e-15));
  for (std::size_t k = 1; k < v.size(); ++k) CHECK(v[k].d_prev_s == v[k - 1].d_next_s);
}

TEST_CASE("run means and fallback") {
  std::vector<std::string> labels = Cat({Repeat("<blank>", 2), Repeat("AH", 3), Repeat("<blank>", 2), Repeat("T", 2)});
  const Utterance u = WithTracks(FromLabels(labels), {0, 0, 200, 210, 220});
  const auto v = TextlessRawFeatures(TextlessTokens(u.pg), u.pitch, u.ceps, u.pg);
  REQUIRE(v.size() == 2);
  CHECK(v[0].f0 == 210.0);
  CHECK(v[0].f0_source == F0Source::kState);
  CHECK(v[0].mgc0 == 3.0);
  CHECK(v[0].posterior_row == u.pg.rows[3]);
  CHECK(v[1].f0_source == F0Source::kUtterance);
  CHECK(v[1].f0 == 210.0);
}

TEST_CASE("normalized distances stay consistent between neighbours") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> pick(0, 3), burst(1, 30);
  std::vector<std::vector<TextlessRefVector>> raw;
  std::vector<Utterance> utts;
  for (int i = 0; i < 6; ++i) {
    std::vector<std::string> labels;
    while (labels.size() < 120) labels.insert(labels.end(), burst(rng), kInventory[pick(rng)]);
    std::vector<double> f0(labels.size());
    for (std::size_t t = 0; t < f0.size(); ++t) f0[t] = t % 7 == 0 ? 0.0 : 120.0 + t % 13;
    utts.push_back(WithTracks(FromLabels(labels, i), f0));
    raw.push_back(TextlessRawFeatures(TextlessTokens(utts.back().pg), utts.back().pitch,
                                      utts.back().ceps, utts.back().pg));
  }
  const SpeakerStats stats = CollectTextlessStats(raw);
  for (const auto& u : utts) {
    const auto v = AggregateTextless(TextlessTokens(u.pg), u.pitch, u.ceps, u.pg, stats);
    for (std::size_t k = 0; k < v.size(); ++k) {
      CHECK(v[k].d_prev_s >= 0.0);
      CHECK(v[k].d_next_s >= 0.0);
      double sum = 0.0;
      for (double p : v[k].posterior_row) sum += p;
      CHECK(std::abs(sum - 1.0) < 1e-6);
      if (k) CHECK(v[k].d_prev == v[k - 1].d_next);
    }
  }
}

TEST_CASE("posteriorgram validation") {
  Posteriorgram pg = FromLabels({"AH", "T"});
  CHECK_NOTHROW(pg.Validate());
  pg.rows[1][0] += 0.01;
  CHECK_THROWS_AS(pg.Validate(), Error);
  Posteriorgram neg = FromLabels({"AH"});
  neg.rows[0] = {1.2, -0.2, 0.0, 0.0};
  CHECK_THROWS_AS(neg.Validate(), Error);
}

TEST_CASE("mismatched tracks are rejected") {
  Utterance u = WithTracks(FromLabels(Repeat("AH", 50)), {});
  u.pitch.f0_hz.resize(40);
  u.pitch.voiced.resize(40);
  u.ceps.frames.resize(40);
  try {
    TextlessRawFeatures(TextlessTokens(u.pg), u.pitch, u.ceps, u.pg);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTrackAlignmentMismatch);
  }
}

TEST_CASE("posteriorgram CSV round trip is byte-stable") {
  const Posteriorgram pg = FromLabels(Cat({Repeat("<blank>", 4), Repeat("AH", 3), Repeat("S", 2)}), 5);
  const std::string text = PosteriorgramToCsv(pg);
  CHECK(text.substr(0, text.find('\n')) == "AH,T,S,<blank>");
  const Posteriorgram back = PosteriorgramFromCsv(text, 10.0);
  CHECK(back.rows == pg.rows);
  CHECK(back.phones == pg.phones);
  CHECK(PosteriorgramToCsv(back) == text);
  CHECK(HopFromSidecarJson(PosteriorgramSidecarJson(12.5)) == 12.5);
  CHECK_THROWS_AS(PosteriorgramFromCsv("AH,<blank>\n0.5,0.4\n", 10.0), Error);
  CHECK_THROWS_AS(PosteriorgramFromCsv("AH,<blank>\n0.5\n", 10.0), Error);
}

TEST_CASE("text-less vector CSV round trip") {
  std::vector<std::string> labels = Repeat("<blank>", 40);
  labels[3] = "AH";
  labels[33] = "T";
  const Utterance u = WithTracks(FromLabels(labels), std::vector<double>(40, 150.0));
  const auto v = TextlessRawFeatures(TextlessTokens(u.pg), u.pitch, u.ceps, u.pg);
  REQUIRE(v.size() == 3);
  const std::string text = TextlessToCsv(v);
  const auto back = TextlessFromCsv(text);
  REQUIRE(back.size() == v.size());
  CHECK(back[1].is_pau);
  CHECK(back[1].posterior_row == v[1].posterior_row);
  CHECK(TextlessToCsv(back) == text);
}

}  // namespace
}  // namespace prosoref
