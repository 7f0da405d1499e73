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

#include "prosoref/cli.h"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <thread>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "prosoref/alignment.h"
#include "prosoref/dsp_features.h"
#include "prosoref/error.h"
#include "prosoref/listening_stats.h"
#include "prosoref/manifest.h"
#include "prosoref/objective_eval.h"
#include "prosoref/prosody.h"
#include "prosoref/text_format.h"
#include "prosoref/textless.h"
#include "prosoref/vae.h"
#include "prosoref/wav.h"

namespace prosoref::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FeatureConfig {
  FrameSpec frame;
  PitchOptions pitch;
  CepstraOptions cepstra;
};

void AddFeatureOptions(CLI::App* cmd, FeatureConfig& cfg) {
  cmd->add_option("--window-ms", cfg.frame.window_ms, "Analysis window")->capture_default_str();
  cmd->add_option("--hop-ms", cfg.frame.hop_ms, "Frame hop")->capture_default_str();
  cmd->add_option("--f0-min", cfg.pitch.f0_min, "Lowest F0 searched (Hz)")->capture_default_str();
  cmd->add_option("--f0-max", cfg.pitch.f0_max, "Highest F0 searched (Hz)")->capture_default_str();
  cmd->add_option("--n-mels", cfg.cepstra.n_mels, "Mel bands")->capture_default_str();
  cmd->add_option("--n-ceps", cfg.cepstra.n_ceps, "Cepstral order")->capture_default_str();
}

struct Features {
  PitchTrack pitch;
  CepstralTrack ceps;
};

Features Extract(const fs::path& audio, const FeatureConfig& cfg) {
  const Waveform wav = ReadWav(audio);
  try {
    return {EstimateF0(wav, cfg.frame, cfg.pitch), ComputeCepstra(wav, cfg.frame, cfg.cepstra)};
  } catch (const Error& e) {
    Fail(e.code(), audio.string() + ": " + e.detail());
  }
}

// Runs `parse` on the file content; data errors gain the file name.
template <typename Parse>
auto ParseFile(const fs::path& path, Parse&& parse) {
  const std::string text = ReadFile(path);
  try {
    return parse(text);
  } catch (const Error& e) {
    Fail(e.code(), path.string() + ": " + e.detail());
  }
}

void Write(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  WriteFile(path, content);
}

fs::path SidecarPath(const fs::path& pg_path) {
  fs::path p = pg_path;
  return p.replace_extension(".json");
}

Posteriorgram LoadPosteriorgram(const fs::path& path) {
  const double hop = ParseFile(SidecarPath(path), [](const std::string& t) { return HopFromSidecarJson(t); });
  return ParseFile(path, [&](const std::string& t) { return PosteriorgramFromCsv(t, hop); });
}

// Evaluates fn(i) for i in [0, n) on up to `jobs` threads. Results keep
// index order; the first failure in index order is rethrown.
template <typename T>
std::vector<T> ParallelMap(std::size_t n, int jobs, const std::function<T(std::size_t)>& fn) {
  std::vector<T> results(n);
  std::vector<std::exception_ptr> errors(n);
  const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, 64));
  auto body = [&](std::size_t w) {
    for (std::size_t i = w; i < n; i += workers) {
      try {
        results[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body, w);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::vector<ManifestEntry> SelectSpeaker(const Manifest& manifest, const std::string& speaker) {
  std::vector<ManifestEntry> out;
  for (const auto& e : manifest.entries) {
    if (speaker.empty() || e.speaker == speaker) out.push_back(e);
  }
  return out;
}

// "{speaker}" in a path is replaced by the speaker id.
fs::path ForSpeaker(const std::string& templ, const std::string& speaker) {
  std::string p = templ;
  const std::string key = "{speaker}";
  for (auto pos = p.find(key); pos != std::string::npos; pos = p.find(key)) p.replace(pos, key.size(), speaker);
  return p;
}

std::vector<std::string> SpeakersToProcess(const Manifest& manifest, const std::string& speaker,
                                           const std::string& path_template) {
  if (!speaker.empty()) return {speaker};
  auto speakers = manifest.Speakers();
  if (speakers.size() > 1 && path_template.find("{speaker}") == std::string::npos) {
    throw UsageError("manifest has " + std::to_string(speakers.size()) +
                     " speakers; pass --speaker or put {speaker} in the stats path");
  }
  return speakers;
}

std::shared_ptr<spdlog::logger> MakeLogger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("prosoref", sink);
  logger->set_pattern("[%l] %v");
  const char* env = std::getenv("PROSOREF_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug") {
    logger->set_level(spdlog::level::debug);
  } else if (level == "info") {
    logger->set_level(spdlog::level::info);
  } else {
    logger->set_level(spdlog::level::err);
  }
  return logger;
}

// ---------------------------------------------------------------------------

struct ExtractArgs {
  std::string audio, out_f0, out_ceps;
  FeatureConfig features;
};

void RunExtract(const ExtractArgs& a, spdlog::logger& log) {
  const Features f = Extract(a.audio, a.features);
  Write(a.out_f0, PitchTrackToJson(f.pitch));
  Write(a.out_ceps, CepstralTrackToJson(f.ceps));
  log.info("extract: {} frames from {}", f.pitch.size(), a.audio);
}

struct CorpusArgs {
  std::string manifest, stats, out, speaker, mode = "text";
  bool log_duration = false;
  bool raw = false;
  double pause_ms = kPauseThresholdMs;
  int jobs = 1;
  FeatureConfig features;
};

PhoneAlignment LoadAlignment(const fs::path& path) {
  return ParseFile(path, [](const std::string& t) { return ParseAlignment(t); });
}

void RunStatsCollect(const CorpusArgs& a, spdlog::logger& log) {
  const Manifest manifest = ValidateManifest(a.manifest);
  const bool textless = a.mode == "textless";
  for (const auto& speaker : SpeakersToProcess(manifest, a.speaker, a.out)) {
    std::vector<ManifestEntry> entries;
    for (const auto& e : SelectSpeaker(manifest, speaker)) {
      if (textless ? e.posteriorgram.has_value() : e.alignment.has_value()) entries.push_back(e);
    }
    if (entries.empty()) {
      Fail(ErrorCode::kEmptyCorpus, "speaker '" + speaker + "' has no usable entries");
    }
    SpeakerStats stats;
    if (textless) {
      auto raw = ParallelMap<std::vector<TextlessRefVector>>(entries.size(), a.jobs, [&](std::size_t i) {
        const Features f = Extract(entries[i].audio, a.features);
        const Posteriorgram pg = LoadPosteriorgram(*entries[i].posteriorgram);
        return TextlessRawFeatures(TextlessTokens(pg, a.pause_ms), f.pitch, f.ceps, pg);
      });
      stats = CollectTextlessStats(raw);
      if (a.log_duration) {
        Fail(ErrorCode::kInvalidArgument, "--log-duration is only supported in text mode");
      }
    } else {
      auto raw = ParallelMap<std::vector<ProsodyVector>>(entries.size(), a.jobs, [&](std::size_t i) {
        const Features f = Extract(entries[i].audio, a.features);
        const PhoneAlignment align = LoadAlignment(*entries[i].alignment);
        try {
          return AggregateUtterance(f.pitch, f.ceps, align);
        } catch (const Error& e) {
          Fail(e.code(), entries[i].id + ": " + e.detail());
        }
      });
      stats = StatsFromVectors(raw, a.log_duration ? DurationScale::kLog : DurationScale::kLinear);
    }
    const fs::path out = ForSpeaker(a.out, speaker);
    Write(out, SpeakerStatsToJson(stats));
    log.info("stats-collect: speaker '{}' from {} utterances -> {}", speaker, entries.size(), out.string());
  }
}

void RunAggregate(const CorpusArgs& a, spdlog::logger& log) {
  const Manifest manifest = ValidateManifest(a.manifest);
  std::vector<ManifestEntry> entries;
  for (const auto& e : SelectSpeaker(manifest, a.speaker)) {
    if (e.alignment) entries.push_back(e);
  }
  if (entries.empty()) Fail(ErrorCode::kEmptyCorpus, "no manifest entries with alignments");
  if (a.stats.empty() && !a.raw) throw UsageError("--stats is required unless --raw is given");
  SpeakersToProcess(manifest, a.speaker, a.stats.empty() ? "{speaker}" : a.stats);

  std::map<std::string, SpeakerStats> stats;
  if (!a.raw) {
    for (const auto& e : entries) {
      if (stats.count(e.speaker)) continue;
      stats[e.speaker] = ParseFile(ForSpeaker(a.stats, e.speaker),
                                   [](const std::string& t) { return SpeakerStatsFromJson(t); });
    }
  }
  auto corpus = ParallelMap<UtteranceVectors>(entries.size(), a.jobs, [&](std::size_t i) {
    const auto& e = entries[i];
    const Features f = Extract(e.audio, a.features);
    const PhoneAlignment align = LoadAlignment(*e.alignment);
    try {
      auto raw = AggregateUtterance(f.pitch, f.ceps, align);
      return UtteranceVectors{e.id, a.raw ? raw : Normalize(raw, stats.at(e.speaker))};
    } catch (const Error& err) {
      Fail(err.code(), e.id + ": " + err.detail());
    }
  });
  Write(a.out, ProsodyCorpusToCsv(corpus));
  std::size_t rows = 0;
  for (const auto& u : corpus) rows += u.vectors.size();
  log.info("aggregate: {} vectors from {} utterances", rows, corpus.size());
}

void RunAggregateTextless(const CorpusArgs& a, spdlog::logger& log) {
  const Manifest manifest = ValidateManifest(a.manifest);
  std::vector<ManifestEntry> entries;
  for (const auto& e : SelectSpeaker(manifest, a.speaker)) {
    if (e.posteriorgram) entries.push_back(e);
  }
  if (entries.empty()) Fail(ErrorCode::kEmptyCorpus, "no manifest entries with posteriorgrams");
  SpeakersToProcess(manifest, a.speaker, a.stats);
  std::map<std::string, SpeakerStats> stats;
  for (const auto& e : entries) {
    if (stats.count(e.speaker)) continue;
    stats[e.speaker] = ParseFile(ForSpeaker(a.stats, e.speaker),
                                 [](const std::string& t) { return SpeakerStatsFromJson(t); });
  }
  auto blocks = ParallelMap<std::string>(entries.size(), a.jobs, [&](std::size_t i) {
    const auto& e = entries[i];
    const Features f = Extract(e.audio, a.features);
    const Posteriorgram pg = LoadPosteriorgram(*e.posteriorgram);
    try {
      const auto tokens = TextlessTokens(pg, a.pause_ms);
      const auto vectors = AggregateTextless(tokens, f.pitch, f.ceps, pg, stats.at(e.speaker));
      std::string rows;
      const auto csv = TextlessToCsv(vectors);
      auto lines = SplitLines(csv);
      for (std::size_t k = 1; k < lines.size(); ++k) rows += e.id + ',' + std::string(lines[k]) + '\n';
      return rows;
    } catch (const Error& err) {
      Fail(err.code(), e.id + ": " + err.detail());
    }
  });
  std::string out = "utt," + std::string(SplitLines(TextlessToCsv({}))[0]) + '\n';
  for (const auto& b : blocks) out += b;
  Write(a.out, out);
  log.info("aggregate-textless: {} utterances", entries.size());
}

std::vector<UtteranceVectors> LoadVectors(const fs::path& path) {
  return ParseFile(path, [](const std::string& t) {
    if (t.rfind("utt,", 0) == 0) return ProsodyCorpusFromCsv(t);
    return std::vector<UtteranceVectors>{{"", ProsodyFromCsv(t)}};
  });
}

struct VaeArgs {
  std::string vectors, config, out_params, out_history, params, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> iterations;
  std::optional<double> lr;
  bool sample = false;
};

void RunVaeTrain(const VaeArgs& a, spdlog::logger& log) {
  TrainConfig cfg;
  if (!a.config.empty()) {
    cfg = ParseFile(a.config, [](const std::string& t) { return TrainConfigFromJson(t); });
  }
  if (a.seed) cfg.seed = *a.seed;
  if (a.iterations) cfg.iterations = *a.iterations;
  if (a.lr) cfg.learning_rate = *a.lr;
  cfg.Validate();
  std::vector<ProsodyFeatures> data;
  for (const auto& u : LoadVectors(a.vectors)) {
    auto f = FeaturesOf(u.vectors);
    data.insert(data.end(), f.begin(), f.end());
  }
  const TrainResult result = Train(data, cfg);
  Write(a.out_params, ParamsToJson(result.params));
  if (!a.out_history.empty()) Write(a.out_history, HistoryToCsv(result.history));
  log.info("vae-train: {} vectors, reconstruction {} -> {}", data.size(), result.initial_recon,
           result.final_recon);
}

void RunVaeEncode(const VaeArgs& a, spdlog::logger& log) {
  const EncoderParams params = ParseFile(a.params, [](const std::string& t) { return ParamsFromJson(t); });
  std::mt19937_64 rng(a.seed.value_or(0));
  std::string out = "utt,index,phone";
  for (const char* name : {"mu", "log_sigma"}) {
    for (int d = 0; d < params.latent; ++d) out += std::string(",") + name + "_" + std::to_string(d + 1);
  }
  if (a.sample) {
    for (int d = 0; d < params.latent; ++d) out += ",z_" + std::to_string(d + 1);
  }
  out += '\n';
  std::size_t rows = 0;
  for (const auto& u : LoadVectors(a.vectors)) {
    for (std::size_t k = 0; k < u.vectors.size(); ++k) {
      const auto x = u.vectors[k].Numeric();
      const GaussianPosterior post = Encode(params, x);
      out += u.utt + ',' + std::to_string(k) + ',' + u.vectors[k].phone;
      for (Eigen::Index d = 0; d < post.mu.size(); ++d) out += ',' + FormatShortest(post.mu(d));
      for (Eigen::Index d = 0; d < post.log_sigma.size(); ++d) out += ',' + FormatShortest(post.log_sigma(d));
      if (a.sample) {
        const Eigen::VectorXd z = ReparamSample(post, rng);
        for (Eigen::Index d = 0; d < z.size(); ++d) out += ',' + FormatShortest(z(d));
      }
      out += '\n';
      ++rows;
    }
  }
  Write(a.out, out);
  log.info("vae-encode: {} rows", rows);
}

struct EvalArgs {
  std::string ref_dir, syn_dir, out, table, model = "system", ref_label = "ref";
  double gross = kGrossPitchThreshold;
  int jobs = 1;
  FeatureConfig features;
};

// Utterance ids in a directory: <id>.f0.json with <id>.ceps.json, or <id>.wav.
std::vector<std::string> UtteranceIds(const fs::path& dir) {
  if (!fs::is_directory(dir)) Fail(ErrorCode::kFileNotFound, dir.string() + " is not a directory");
  std::set<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    const std::string f0_suffix = ".f0.json";
    if (name.size() > f0_suffix.size() &&
        name.compare(name.size() - f0_suffix.size(), f0_suffix.size(), f0_suffix) == 0) {
      ids.insert(name.substr(0, name.size() - f0_suffix.size()));
    } else if (entry.path().extension() == ".wav") {
      ids.insert(entry.path().stem().string());
    }
  }
  return {ids.begin(), ids.end()};
}

Features LoadTracks(const fs::path& dir, const std::string& id, const FeatureConfig& cfg) {
  const fs::path f0 = dir / (id + ".f0.json");
  const fs::path ceps = dir / (id + ".ceps.json");
  if (fs::exists(f0) && fs::exists(ceps)) {
    return {ParseFile(f0, [](const std::string& t) { return PitchTrackFromJson(t); }),
            ParseFile(ceps, [](const std::string& t) { return CepstralTrackFromJson(t); })};
  }
  const fs::path wav = dir / (id + ".wav");
  if (fs::exists(wav)) return Extract(wav, cfg);
  Fail(ErrorCode::kFileNotFound, "no tracks or audio for '" + id + "' in " + dir.string());
}

void RunEvaluate(const EvalArgs& a, spdlog::logger& log) {
  const auto ids = UtteranceIds(a.ref_dir);
  if (ids.empty()) Fail(ErrorCode::kEmptyCorpus, "no utterances in " + a.ref_dir);
  auto reports = ParallelMap<EvalReport>(ids.size(), a.jobs, [&](std::size_t i) {
    UtterancePair pair;
    pair.id = ids[i];
    Features ref = LoadTracks(a.ref_dir, ids[i], a.features);
    Features syn = LoadTracks(a.syn_dir, ids[i], a.features);
    pair.ref_pitch = std::move(ref.pitch);
    pair.ref_ceps = std::move(ref.ceps);
    pair.syn_pitch = std::move(syn.pitch);
    pair.syn_ceps = std::move(syn.ceps);
    try {
      return EvaluateUtterance(pair, a.gross);
    } catch (const Error& e) {
      Fail(e.code(), ids[i] + ": " + e.detail());
    }
  });
  const CorpusSummary summary = SummarizeReports(ids, std::move(reports));
  Write(a.out, CorpusSummaryToJson(summary));
  if (!a.table.empty()) {
    const std::vector<TableRow> rows = {{a.model, a.ref_label, summary}};
    Write(a.table, RenderTable(rows));
  }
  log.info("evaluate: {} utterances, RMSE {}", ids.size(), FormatMeanSd(summary.rmse_hz, 1));
}

struct MushraArgs {
  std::string scores, out, quartiles;
  std::size_t exact_max_n = 12;
};

void RunMushra(const MushraArgs& a, spdlog::logger& log) {
  const MushraScores scores = ParseFile(a.scores, [](const std::string& t) { return MushraFromCsv(t); });
  MushraReportOptions options;
  options.wilcoxon.exact_max_n = a.exact_max_n;
  Write(a.out, MushraReportJson(scores, options));
  if (!a.quartiles.empty()) Write(a.quartiles, QuartilesToCsv(MushraQuartiles(scores)));
  log.info("mushra-stats: {} ratings over {} systems", scores.ratings.size(), scores.systems.size());
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phoneme-level prosody reference extraction, encoding and evaluation", "prosoref"};
  app.require_subcommand(1);

  ExtractArgs extract;
  auto* c_extract = app.add_subcommand("extract", "Frame-level F0 and cepstra from a WAV file");
  c_extract->add_option("--audio", extract.audio)->required();
  c_extract->add_option("--out-f0", extract.out_f0)->required();
  c_extract->add_option("--out-ceps", extract.out_ceps)->required();
  AddFeatureOptions(c_extract, extract.features);

  CorpusArgs stats_args;
  auto* c_stats = app.add_subcommand("stats-collect", "Per-speaker normalization statistics");
  c_stats->add_option("--manifest", stats_args.manifest)->required();
  c_stats->add_option("--out", stats_args.out, "Output JSON; {speaker} expands per speaker")->required();
  c_stats->add_option("--speaker", stats_args.speaker);
  c_stats->add_option("--mode", stats_args.mode)->check(CLI::IsMember({"text", "textless"}))->capture_default_str();
  c_stats->add_flag("--log-duration", stats_args.log_duration, "Normalize log durations");
  c_stats->add_option("--pause-ms", stats_args.pause_ms)->capture_default_str();
  c_stats->add_option("--jobs", stats_args.jobs)->capture_default_str();
  AddFeatureOptions(c_stats, stats_args.features);

  CorpusArgs agg_args;
  auto* c_agg = app.add_subcommand("aggregate", "Per-phoneme prosody vectors from alignments");
  c_agg->add_option("--manifest", agg_args.manifest)->required();
  c_agg->add_option("--stats", agg_args.stats, "Speaker stats JSON; {speaker} expands per speaker");
  c_agg->add_option("--out", agg_args.out)->required();
  c_agg->add_option("--speaker", agg_args.speaker);
  c_agg->add_flag("--raw", agg_args.raw, "Skip normalization");
  c_agg->add_option("--jobs", agg_args.jobs)->capture_default_str();
  AddFeatureOptions(c_agg, agg_args.features);

  CorpusArgs tl_args;
  auto* c_tl = app.add_subcommand("aggregate-textless", "Reference vectors from CTC posteriorgrams");
  c_tl->add_option("--manifest", tl_args.manifest)->required();
  c_tl->add_option("--stats", tl_args.stats)->required();
  c_tl->add_option("--out", tl_args.out)->required();
  c_tl->add_option("--speaker", tl_args.speaker);
  c_tl->add_option("--pause-ms", tl_args.pause_ms)->capture_default_str();
  c_tl->add_option("--jobs", tl_args.jobs)->capture_default_str();
  AddFeatureOptions(c_tl, tl_args.features);

  VaeArgs train_args;
  auto* c_train = app.add_subcommand("vae-train", "Train the variational reference encoder");
  c_train->add_option("--vectors", train_args.vectors)->required();
  c_train->add_option("--config", train_args.config, "TrainConfig JSON");
  c_train->add_option("--seed", train_args.seed);
  c_train->add_option("--iterations", train_args.iterations);
  c_train->add_option("--lr", train_args.lr);
  c_train->add_option("--out-params", train_args.out_params)->required();
  c_train->add_option("--out-history", train_args.out_history);

  VaeArgs enc_args;
  auto* c_enc = app.add_subcommand("vae-encode", "Posterior mean/log-sigma per phoneme");
  c_enc->add_option("--params", enc_args.params)->required();
  c_enc->add_option("--vectors", enc_args.vectors)->required();
  c_enc->add_option("--out", enc_args.out)->required();
  c_enc->add_flag("--sample", enc_args.sample, "Also draw a reparameterized sample");
  c_enc->add_option("--seed", enc_args.seed);

  EvalArgs eval_args;
  auto* c_eval = app.add_subcommand("evaluate", "DTW-aligned F0 RMSE, correlation and FFE");
  c_eval->add_option("--ref-dir", eval_args.ref_dir)->required();
  c_eval->add_option("--syn-dir", eval_args.syn_dir)->required();
  c_eval->add_option("--out", eval_args.out)->required();
  c_eval->add_option("--table", eval_args.table, "Also write a text table");
  c_eval->add_option("--model", eval_args.model)->capture_default_str();
  c_eval->add_option("--ref-label", eval_args.ref_label)->capture_default_str();
  c_eval->add_option("--gross-threshold", eval_args.gross)->capture_default_str();
  c_eval->add_option("--jobs", eval_args.jobs)->capture_default_str();
  AddFeatureOptions(c_eval, eval_args.features);

  MushraArgs mushra_args;
  auto* c_mushra = app.add_subcommand("mushra-stats", "Medians and significance tests for MUSHRA scores");
  c_mushra->add_option("--scores", mushra_args.scores)->required();
  c_mushra->add_option("--out", mushra_args.out)->required();
  c_mushra->add_option("--quartiles", mushra_args.quartiles, "Also write per-system quartiles CSV");
  c_mushra->add_option("--exact-max-n", mushra_args.exact_max_n)->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto log = MakeLogger(err);
  try {
    if (c_extract->parsed()) RunExtract(extract, *log);
    if (c_stats->parsed()) RunStatsCollect(stats_args, *log);
    if (c_agg->parsed()) RunAggregate(agg_args, *log);
    if (c_tl->parsed()) RunAggregateTextless(tl_args, *log);
    if (c_train->parsed()) RunVaeTrain(train_args, *log);
    if (c_enc->parsed()) RunVaeEncode(enc_args, *log);
    if (c_eval->parsed()) RunEvaluate(eval_args, *log);
    if (c_mushra->parsed()) RunMushra(mushra_args, *log);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace prosoref::cli
