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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "prosoref/alignment.h"
#include "prosoref/cli.h"
#include "prosoref/dsp_features.h"
#include "prosoref/listening_stats.h"
#include "prosoref/objective_eval.h"
#include "prosoref/prosody.h"
#include "prosoref/text_format.h"
#include "prosoref/textless.h"
#include "prosoref/vae.h"
#include "prosoref/wav.h"
#include "test_support.h"

namespace prosoref {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out, err;
};

// Runs the installed binary through the shell; stdout and stderr go to files.
Result RunBinary(const std::vector<std::string>& args, const fs::path& scratch) {
  std::string cmd = std::string("'") + PROSOREF_CLI_PATH + "'";
  for (const auto& a : args) cmd += " '" + a + "'";
  const fs::path out = scratch / "stdout.txt", err = scratch / "stderr.txt";
  cmd += " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = ReadFile(out);
  r.err = ReadFile(err);
  return r;
}

Result RunInProcess(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::Run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Three utterances of twelve phones each: harmonic segments at distinct
// pitches, noise for fricatives and silence for the pause.
class Fixture {
 public:
  explicit Fixture(const std::string& speaker_b = "spk1") : dir_("cli") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> dur_ms(90, 140);
    std::uniform_real_distribution<double> f0(110, 220), noise(-0.1, 0.1);
    const std::vector<std::string> phones = {"AH", "T", "IY", "N", "EH", "S", "pau", "K", "AH", "N", "IY", "EH"};
    std::string manifest = "id\taudio\talignment\tposteriorgram\tspeaker\n";
    for (int u = 0; u < 3; ++u) {
      const std::string id = "utt" + std::to_string(u + 1);
      Waveform wav;
      std::string lab;
      Posteriorgram pg;
      pg.phones = {"AH", "T", "IY", "N", "EH", "S", "K", std::string(kBlankSymbol)};
      std::size_t frames = 0;
      double t = 0.0;
      for (const auto& p : phones) {
        const int ms = dur_ms(rng);
        const auto n = static_cast<std::size_t>(ms * 16);
        const double hz = f0(rng);
        const bool unvoiced = p == "T" || p == "S" || p == "K";
        for (std::size_t i = 0; i < n; ++i) {
          const double time = static_cast<double>(wav.samples.size()) / 16000.0;
          double x = 0.0;
          if (unvoiced) {
            x = noise(rng);
          } else if (p != "pau") {
            x = 0.4 * std::sin(2.0 * M_PI * hz * time) + 0.1 * std::sin(4.0 * M_PI * hz * time);
          }
          wav.samples.push_back(x);
        }
        const double end = t + ms / 1000.0;
        lab += FormatFixed(t, 6) + '\t' + FormatFixed(end, 6) + '\t' + p + '\n';
        t = end;
        // Posteriorgram at 10 ms: one peaked frame per phone, blanks elsewhere.
        const std::size_t until = static_cast<std::size_t>(end * 100.0);
        for (std::size_t f = frames; f < until; ++f) {
          std::vector<double> row(pg.phones.size(), 0.0);
          std::size_t hot = pg.phones.size() - 1;
          if (f == frames + 1 && p != "pau") {
            hot = static_cast<std::size_t>(std::find(pg.phones.begin(), pg.phones.end(), p) - pg.phones.begin());
          }
          row[hot] = 0.9;
          row[(hot + 1) % row.size()] = 0.1;
          pg.rows.push_back(std::move(row));
        }
        frames = until;
      }
      WriteWav(dir_.path() / (id + ".wav"), wav, WavEncoding::kFloat32);
      WriteFile(dir_.path() / (id + ".lab"), lab);
      WriteFile(dir_.path() / (id + ".post.csv"), PosteriorgramToCsv(pg));
      WriteFile(dir_.path() / (id + ".post.json"), PosteriorgramSidecarJson(10.0));
      const std::string spk = u == 2 ? speaker_b : "spk1";
      manifest += id + '\t' + id + ".wav\t" + id + ".lab\t" + id + ".post.csv\t" + spk + '\n';
      ids_.push_back(id);
    }
    WriteFile(manifest_path(), manifest);
  }

  fs::path path() const { return dir_.path(); }
  fs::path manifest_path() const { return dir_.path() / "manifest.tsv"; }
  std::string p(const std::string& name) const { return (dir_.path() / name).string(); }
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  testing::TempDir dir_;
  std::vector<std::string> ids_;
};

// The text pipeline composed directly from the library.
std::string LibraryAggregate(const Fixture& fx) {
  std::vector<std::vector<ProsodyVector>> raw;
  for (const auto& id : fx.ids()) {
    const Waveform wav = ReadWav(fx.path() / (id + ".wav"));
    const PitchTrack pitch = EstimateF0(wav, {}, {});
    const CepstralTrack ceps = ComputeCepstra(wav, {}, {});
    raw.push_back(AggregateUtterance(pitch, ceps, ParseAlignment(ReadFile(fx.path() / (id + ".lab")))));
  }
  const SpeakerStats stats = StatsFromVectors(raw, DurationScale::kLinear);
  std::vector<UtteranceVectors> corpus;
  for (std::size_t i = 0; i < raw.size(); ++i) corpus.push_back({fx.ids()[i], Normalize(raw[i], stats)});
  return ProsodyCorpusToCsv(corpus);
}

TEST_CASE("help and usage exit codes") {
  testing::TempDir scratch("cli_io");
  CHECK(RunBinary({"--help"}, scratch.path()).code == cli::kExitOk);
  CHECK(RunBinary({"--help"}, scratch.path()).out.find("aggregate-textless") != std::string::npos);
  CHECK(RunBinary({}, scratch.path()).code == cli::kExitUsage);
  CHECK(RunBinary({"no-such-command"}, scratch.path()).code == cli::kExitUsage);
  CHECK(RunBinary({"extract", "--audio", "x.wav"}, scratch.path()).code == cli::kExitUsage);
  CHECK(RunBinary({"stats-collect", "--manifest", "m", "--out", "o", "--mode", "bogus"}, scratch.path()).code ==
        cli::kExitUsage);
}

TEST_CASE("data errors exit with code 2 and name the file") {
  testing::TempDir scratch("cli_io");
  const Result r = RunBinary({"extract", "--audio", (scratch.path() / "missing.wav").string(), "--out-f0",
                              (scratch.path() / "a.json").string(), "--out-ceps", (scratch.path() / "b.json").string()},
                             scratch.path());
  CHECK(r.code == cli::kExitData);
  CHECK(r.err.find("missing.wav") != std::string::npos);

  WriteFile(scratch.path() / "bad.wav", "RIFFnot really");
  CHECK(RunInProcess({"extract", "--audio", (scratch.path() / "bad.wav").string(), "--out-f0",
                      (scratch.path() / "a.json").string(), "--out-ceps", (scratch.path() / "b.json").string()})
            .code == cli::kExitData);
}

TEST_CASE("extract writes the library tracks") {
  Fixture fx;
  testing::TempDir scratch("cli_io");
  const Result r = RunBinary({"extract", "--audio", fx.p("utt1.wav"), "--out-f0", fx.p("out/utt1.f0.json"),
                              "--out-ceps", fx.p("out/utt1.ceps.json")},
                             scratch.path());
  REQUIRE(r.code == cli::kExitOk);
  const Waveform wav = ReadWav(fx.path() / "utt1.wav");
  CHECK(ReadFile(fx.p("out/utt1.f0.json")) == PitchTrackToJson(EstimateF0(wav, {}, {})));
  CHECK(ReadFile(fx.p("out/utt1.ceps.json")) == CepstralTrackToJson(ComputeCepstra(wav, {}, {})));
  const PitchTrack back = PitchTrackFromJson(ReadFile(fx.p("out/utt1.f0.json")));
  CHECK(PitchTrackToJson(back) == ReadFile(fx.p("out/utt1.f0.json")));
}

TEST_CASE("text pipeline through files matches the library") {
  Fixture fx;
  testing::TempDir scratch("cli_io");
  Result r = RunBinary({"stats-collect", "--manifest", fx.manifest_path().string(), "--out", fx.p("stats.json")},
                       scratch.path());
  REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
  r = RunBinary({"aggregate", "--manifest", fx.manifest_path().string(), "--stats", fx.p("stats.json"), "--out",
                 fx.p("vectors.csv")},
                scratch.path());
  REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
  const std::string csv = ReadFile(fx.p("vectors.csv"));
  CHECK(csv == LibraryAggregate(fx));

  const auto corpus = ProsodyCorpusFromCsv(csv);
  REQUIRE(corpus.size() == 3);
  for (const auto& u : corpus) CHECK(u.vectors.size() == 12);
  CHECK(ProsodyCorpusToCsv(corpus) == csv);

  // Parallel extraction keeps manifest order and bytes.
  r = RunBinary({"aggregate", "--manifest", fx.manifest_path().string(), "--stats", fx.p("stats.json"), "--out",
                 fx.p("vectors_j3.csv"), "--jobs", "3"},
                scratch.path());
  REQUIRE(r.code == cli::kExitOk);
  CHECK(ReadFile(fx.p("vectors_j3.csv")) == csv);

  r = RunBinary({"aggregate", "--manifest", fx.manifest_path().string(), "--out", fx.p("raw.csv"), "--raw"},
                scratch.path());
  REQUIRE(r.code == cli::kExitOk);
  CHECK(ReadFile(fx.p("raw.csv")) != csv);
}

TEST_CASE("several speakers need a selection or a path template") {
  Fixture fx("spk2");
  const std::string m = fx.manifest_path().string();
  CHECK(RunInProcess({"stats-collect", "--manifest", m, "--out", fx.p("stats.json")}).code == cli::kExitUsage);
  REQUIRE(RunInProcess({"stats-collect", "--manifest", m, "--out", fx.p("stats_{speaker}.json")}).code ==
          cli::kExitOk);
  CHECK(fs::exists(fx.p("stats_spk1.json")));
  CHECK(fs::exists(fx.p("stats_spk2.json")));
  const Result r = RunInProcess(
      {"aggregate", "--manifest", m, "--stats", fx.p("stats_{speaker}.json"), "--out", fx.p("v.csv")});
  REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
  CHECK(ProsodyCorpusFromCsv(ReadFile(fx.p("v.csv"))).size() == 3);
}

TEST_CASE("textless pipeline") {
  Fixture fx;
  const std::string m = fx.manifest_path().string();
  Result r = RunInProcess({"stats-collect", "--manifest", m, "--mode", "textless", "--out", fx.p("tl_stats.json")});
  REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
  r = RunInProcess({"aggregate-textless", "--manifest", m, "--stats", fx.p("tl_stats.json"), "--out", fx.p("tl.csv")});
  REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
  const std::string tl = ReadFile(fx.p("tl.csv"));
  const auto lines = SplitLines(tl);
  REQUIRE(!lines.empty());
  CHECK(lines[0].substr(0, 4) == "utt,");

  // One emission per non-pause phone plus the inserted pause when the gap allows.
  std::size_t expected = 0;
  for (const auto& id : fx.ids()) {
    const Posteriorgram pg = PosteriorgramFromCsv(ReadFile(fx.path() / (id + ".post.csv")), 10.0);
    expected += TextlessTokens(pg).size();
  }
  std::size_t rows = 0;
  for (std::size_t k = 1; k < lines.size(); ++k) rows += !Trim(lines[k]).empty();
  CHECK(rows == expected);
  CHECK(RunInProcess({"stats-collect", "--manifest", m, "--mode", "textless", "--log-duration", "--out",
                      fx.p("x.json")})
            .code == cli::kExitData);
}

TEST_CASE("evaluating a directory against itself") {
  Fixture fx;
  testing::TempDir scratch("cli_io");
  const Result r = RunBinary({"evaluate", "--ref-dir", fx.path().string(), "--syn-dir", fx.path().string(), "--out",
                              fx.p("eval/summary.json"), "--table", fx.p("eval/table.txt"), "--jobs", "2"},
                             scratch.path());
  REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
  const auto j = nlohmann::json::parse(ReadFile(fx.p("eval/summary.json")));
  REQUIRE(j["utterances"].size() == 3);
  for (const auto& u : j["utterances"]) {
    CHECK(u["rmse_hz"].get<double>() == 0.0);
    CHECK(u["corr"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(u["ffe_pct"].get<double>() == 0.0);
  }
  CHECK(j["utterances"][0]["id"] == "utt1");
  CHECK(ReadFile(fx.p("eval/table.txt")).find("| system") != std::string::npos);

  testing::TempDir empty("cli_empty");
  CHECK(RunInProcess({"evaluate", "--ref-dir", empty.path().string(), "--syn-dir", fx.path().string(), "--out",
                      fx.p("e.json")})
            .code == cli::kExitData);
}

TEST_CASE("VAE training is reproducible through files") {
  Fixture fx;
  const std::string m = fx.manifest_path().string();
  REQUIRE(RunInProcess({"stats-collect", "--manifest", m, "--out", fx.p("stats.json")}).code == cli::kExitOk);
  REQUIRE(RunInProcess({"aggregate", "--manifest", m, "--stats", fx.p("stats.json"), "--out", fx.p("v.csv")}).code ==
          cli::kExitOk);
  TrainConfig small;
  small.iterations = 300;
  small.kl_start_iter = 100;
  small.kl_end_iter = 200;
  small.batch_size = 8;
  WriteFile(fx.p("cfg.json"), TrainConfigToJson(small));
  for (const char* name : {"a", "b"}) {
    const Result r = RunInProcess({"vae-train", "--vectors", fx.p("v.csv"), "--config", fx.p("cfg.json"), "--seed", "5",
                                   "--out-params", fx.p(std::string(name) + ".params.json"), "--out-history",
                                   fx.p(std::string(name) + ".history.csv")});
    REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
  }
  CHECK(ReadFile(fx.p("a.params.json")) == ReadFile(fx.p("b.params.json")));
  CHECK(ReadFile(fx.p("a.history.csv")) == ReadFile(fx.p("b.history.csv")));

  // Same result as training on the parsed vectors in process.
  std::vector<ProsodyFeatures> data;
  for (const auto& u : ProsodyCorpusFromCsv(ReadFile(fx.p("v.csv")))) {
    auto f = FeaturesOf(u.vectors);
    data.insert(data.end(), f.begin(), f.end());
  }
  small.seed = 5;
  CHECK(ReadFile(fx.p("a.params.json")) == ParamsToJson(Train(data, small).params));

  const Result enc = RunInProcess({"vae-encode", "--params", fx.p("a.params.json"), "--vectors", fx.p("v.csv"),
                                   "--out", fx.p("z.csv"), "--sample", "--seed", "1"});
  REQUIRE_MESSAGE(enc.code == cli::kExitOk, enc.err);
  const std::string z = ReadFile(fx.p("z.csv"));
  const auto lines = SplitLines(z);
  CHECK(lines[0].substr(0, 20) == "utt,index,phone,mu_1");
  CHECK(SplitFields(lines[1], ',').size() == 3 + 3 * static_cast<std::size_t>(small.latent));
  CHECK(lines[1].substr(0, 7) == "utt1,0,");
}

TEST_CASE("listening-test statistics through files") {
  testing::TempDir dir("cli_mushra");
  std::string csv = "listener,utterance,system,score\n";
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> u(0, 25);
  for (int l = 0; l < 4; ++l) {
    for (int k = 0; k < 5; ++k) {
      for (auto [name, base] : {std::pair{"base", 20}, std::pair{"agg", 50}, std::pair{"ref", 70}}) {
        csv += "L" + std::to_string(l) + ",u" + std::to_string(k) + "," + name + "," + std::to_string(base + u(rng)) +
               "\n";
      }
    }
  }
  WriteFile(dir.path() / "scores.csv", csv);
  const Result r = RunInProcess({"mushra-stats", "--scores", (dir.path() / "scores.csv").string(), "--out",
                                 (dir.path() / "report.json").string(), "--quartiles",
                                 (dir.path() / "q.csv").string()});
  REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
  const MushraScores scores = MushraFromCsv(csv);
  CHECK(ReadFile(dir.path() / "report.json") == MushraReportJson(scores));
  CHECK(ReadFile(dir.path() / "q.csv") == QuartilesToCsv(MushraQuartiles(scores)));

  WriteFile(dir.path() / "bad.csv", "L1,u1,A,150\n");
  const Result bad = RunInProcess({"mushra-stats", "--scores", (dir.path() / "bad.csv").string(), "--out",
                                   (dir.path() / "r.json").string()});
  CHECK(bad.code == cli::kExitData);
  CHECK(bad.err.find("bad.csv") != std::string::npos);
}

}  // namespace
}  // namespace prosoref
