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

#include "prosoref/vae.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "prosoref/error.h"
#include "prosoref/text_format.h"

namespace prosoref {
namespace {

using nlohmann::json;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Dense MakeDense(int out, int in) { return {MatrixXd::Zero(out, in), VectorXd::Zero(out)}; }

MatrixXd TanhGrad(const MatrixXd& h) { return (1.0 - h.array().square()).matrix(); }

// Everything the backward pass needs from one forward pass.
struct Forward {
  MatrixXd h1, h2, raw, log_sigma, sigma, mu, z, h4, recon;
};

Forward RunForward(const EncoderParams& p, const Batch& batch) {
  Forward f;
  const int d = p.latent;
  f.h1 = p.enc1.Forward(batch.inputs).array().tanh().matrix();
  f.h2 = p.enc2.Forward(f.h1).array().tanh().matrix();
  MatrixXd out = p.enc_out.Forward(f.h2);
  f.mu = out.topRows(d);
  f.raw = out.bottomRows(d);
  f.log_sigma = f.raw.cwiseMax(kLogSigmaMin).cwiseMin(kLogSigmaMax);
  f.sigma = f.log_sigma.array().exp().matrix();
  f.z = f.mu + f.sigma.cwiseProduct(batch.noise);
  f.h4 = p.dec1.Forward(f.z).array().tanh().matrix();
  f.recon = p.dec_out.Forward(f.h4);
  return f;
}

LossTerms LossFrom(const Forward& f, const Batch& batch, double kl_weight) {
  const auto b = static_cast<double>(batch.inputs.cols());
  LossTerms t;
  t.recon = (f.recon - batch.inputs).squaredNorm() / (b * static_cast<double>(batch.inputs.rows()));
  t.kl = 0.5 * (f.mu.array().square() + f.sigma.array().square() - 1.0 - 2.0 * f.log_sigma.array())
                   .sum() / b;
  t.total = t.recon + kl_weight * t.kl;
  return t;
}

void CheckBatch(const EncoderParams& p, const Batch& batch) {
  if (batch.inputs.rows() != static_cast<Eigen::Index>(kProsodyDims) || batch.inputs.cols() == 0 ||
      batch.noise.rows() != p.latent || batch.noise.cols() != batch.inputs.cols()) {
    Fail(ErrorCode::kDimMismatch, "batch shape does not match the encoder");
  }
}

json DenseJson(const std::string& name, const Dense& layer) {
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(layer.weight.size()));
  for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) w.push_back(layer.weight(r, c));
  }
  std::vector<double> b(layer.bias.data(), layer.bias.data() + layer.bias.size());
  return json{{"name", name},
              {"rows", layer.weight.rows()},
              {"cols", layer.weight.cols()},
              {"weights", w},
              {"bias", b}};
}

void DenseFrom(const json& j, const std::string& name, Dense& layer) {
  if (j.at("name").get<std::string>() != name) {
    Fail(ErrorCode::kInvalidArgument, "expected layer '" + name + "'");
  }
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto w = j.at("weights").get<std::vector<double>>();
  const auto b = j.at("bias").get<std::vector<double>>();
  if (rows != layer.weight.rows() || cols != layer.weight.cols() ||
      static_cast<Eigen::Index>(w.size()) != rows * cols ||
      static_cast<Eigen::Index>(b.size()) != rows) {
    Fail(ErrorCode::kDimMismatch, "layer '" + name + "' shape mismatch");
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = w[r * cols + c];
    layer.bias(r) = b[r];
  }
  if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
    Fail(ErrorCode::kNonFiniteInput, "layer '" + name + "' has non-finite values");
  }
}

constexpr const char* kLayerNames[] = {"enc1", "enc2", "enc_out", "dec1", "dec_out"};

}  // namespace

MatrixXd Dense::Forward(const MatrixXd& x) const {
  return (weight * x).colwise() + bias;
}

MatrixXd Dense::Backward(const MatrixXd& x, const MatrixXd& grad_y, Dense* grad) const {
  grad->weight += grad_y * x.transpose();
  grad->bias += grad_y.rowwise().sum();
  return weight.transpose() * grad_y;
}

EncoderParams EncoderParams::Zeros(int hidden, int latent) {
  if (hidden < 1 || latent < 1) Fail(ErrorCode::kInvalidArgument, "hidden and latent must be >= 1");
  EncoderParams p;
  p.hidden = hidden;
  p.latent = latent;
  const int in = static_cast<int>(kProsodyDims);
  p.enc1 = MakeDense(hidden, in);
  p.enc2 = MakeDense(hidden, hidden);
  p.enc_out = MakeDense(2 * latent, hidden);
  p.dec1 = MakeDense(hidden, latent);
  p.dec_out = MakeDense(in, hidden);
  return p;
}

EncoderParams EncoderParams::Random(int hidden, int latent, std::mt19937_64& rng,
                                    double bias_scale) {
  EncoderParams p = Zeros(hidden, latent);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Dense* layer : p.Layers()) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer->weight.cols()));
    for (Eigen::Index r = 0; r < layer->weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer->weight.cols(); ++c) {
        layer->weight(r, c) = scale * normal(rng);
      }
    }
    for (Eigen::Index r = 0; r < layer->bias.size(); ++r) layer->bias(r) = bias_scale * normal(rng);
  }
  return p;
}

std::vector<Dense*> EncoderParams::Layers() { return {&enc1, &enc2, &enc_out, &dec1, &dec_out}; }

std::vector<const Dense*> EncoderParams::Layers() const {
  return {&enc1, &enc2, &enc_out, &dec1, &dec_out};
}

std::size_t EncoderParams::ParameterCount() const {
  std::size_t n = 0;
  for (const Dense* layer : Layers()) n += layer->size();
  return n;
}

GaussianPosterior Encode(const EncoderParams& params, std::span<const double> x) {
  if (x.size() != kProsodyDims) {
    Fail(ErrorCode::kDimMismatch, "encoder input must have 7 dims");
  }
  if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
    Fail(ErrorCode::kNonFiniteInput, "encoder input has non-finite values");
  }
  const MatrixXd in = Eigen::Map<const VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  const MatrixXd h1 = params.enc1.Forward(in).array().tanh().matrix();
  const MatrixXd h2 = params.enc2.Forward(h1).array().tanh().matrix();
  const MatrixXd out = params.enc_out.Forward(h2);
  GaussianPosterior post;
  post.mu = out.topRows(params.latent).col(0);
  post.log_sigma =
      out.bottomRows(params.latent).col(0).cwiseMax(kLogSigmaMin).cwiseMin(kLogSigmaMax);
  return post;
}

VectorXd Decode(const EncoderParams& params, const VectorXd& z) {
  if (z.size() != params.latent) Fail(ErrorCode::kDimMismatch, "embedding size mismatch");
  const MatrixXd h = params.dec1.Forward(z).array().tanh().matrix();
  return params.dec_out.Forward(h).col(0);
}

VectorXd ReparamSample(const GaussianPosterior& post, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd z(post.mu.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double eps = normal(rng);
    const double ls = std::clamp(post.log_sigma(i), kLogSigmaMin, kLogSigmaMax);
    z(i) = post.mu(i) + std::exp(ls) * eps;
  }
  return z;
}

double KlDivergence(const GaussianPosterior& post) {
  double kl = 0.0;
  for (Eigen::Index i = 0; i < post.mu.size(); ++i) {
    const double ls = post.log_sigma(i);
    kl += post.mu(i) * post.mu(i) + std::exp(2.0 * ls) - 1.0 - 2.0 * ls;
  }
  return std::max(0.0, 0.5 * kl);
}

void TrainConfig::Validate() const {
  if (!(kl_start_iter < kl_end_iter)) Fail(ErrorCode::kInvalidArgument, "kl_start_iter < kl_end_iter required");
  if (kl_period < 1) Fail(ErrorCode::kInvalidArgument, "kl_period must be >= 1");
  if (iterations < 0 || batch_size < 1 || !(learning_rate > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "iterations >= 0, batch_size >= 1, learning_rate > 0 required");
  }
  if (hidden < 1 || latent < 1) Fail(ErrorCode::kInvalidArgument, "hidden and latent must be >= 1");
}

double KlScale(std::int64_t iteration, const TrainConfig& cfg) {
  if (iteration <= cfg.kl_start_iter) return 0.0;
  if (iteration >= cfg.kl_end_iter) return 1.0;
  return static_cast<double>(iteration - cfg.kl_start_iter) /
         static_cast<double>(cfg.kl_end_iter - cfg.kl_start_iter);
}

bool KlActive(std::int64_t iteration, const TrainConfig& cfg) {
  return iteration % cfg.kl_period == 0;
}

double KlWeight(std::int64_t iteration, const TrainConfig& cfg) {
  if (!KlActive(iteration, cfg)) return 0.0;
  return cfg.anneal ? KlScale(iteration, cfg) : 1.0;
}

LossTerms BatchLoss(const EncoderParams& params, const Batch& batch, double kl_weight) {
  CheckBatch(params, batch);
  return LossFrom(RunForward(params, batch), batch, kl_weight);
}

LossTerms BatchLossAndGradient(const EncoderParams& params, const Batch& batch, double kl_weight,
                               EncoderParams* grad) {
  CheckBatch(params, batch);
  *grad = EncoderParams::Zeros(params.hidden, params.latent);
  const Forward f = RunForward(params, batch);
  const LossTerms loss = LossFrom(f, batch, kl_weight);
  const auto b = static_cast<double>(batch.inputs.cols());
  const double recon_scale = 2.0 / (b * static_cast<double>(kProsodyDims));

  const MatrixXd g_recon = recon_scale * (f.recon - batch.inputs);
  const MatrixXd g_h4 = params.dec_out.Backward(f.h4, g_recon, &grad->dec_out);
  const MatrixXd g_a4 = g_h4.cwiseProduct(TanhGrad(f.h4));
  const MatrixXd g_z = params.dec1.Backward(f.z, g_a4, &grad->dec1);

  const double kl_coef = kl_weight / b;
  const MatrixXd g_mu = g_z + kl_coef * f.mu;
  MatrixXd g_ls = g_z.cwiseProduct(f.sigma).cwiseProduct(batch.noise) +
                  kl_coef * (f.sigma.array().square() - 1.0).matrix();
  // Clamped entries pass no gradient.
  for (Eigen::Index i = 0; i < g_ls.size(); ++i) {
    if (f.raw(i) <= kLogSigmaMin || f.raw(i) >= kLogSigmaMax) g_ls(i) = 0.0;
  }
  MatrixXd g_out(2 * params.latent, batch.inputs.cols());
  g_out << g_mu, g_ls;
  const MatrixXd g_h2 = params.enc_out.Backward(f.h2, g_out, &grad->enc_out);
  const MatrixXd g_a2 = g_h2.cwiseProduct(TanhGrad(f.h2));
  const MatrixXd g_h1 = params.enc2.Backward(f.h1, g_a2, &grad->enc2);
  const MatrixXd g_a1 = g_h1.cwiseProduct(TanhGrad(f.h1));
  params.enc1.Backward(batch.inputs, g_a1, &grad->enc1);
  return loss;
}

double GradCheck(const EncoderParams& params, const Batch& batch, double kl_weight, double eps) {
  EncoderParams analytic;
  BatchLossAndGradient(params, batch, kl_weight, &analytic);
  EncoderParams probe = params;
  auto probe_layers = probe.Layers();
  auto grad_layers = analytic.Layers();
  double worst = 0.0;
  auto check = [&](double& slot, double a) {
    const double saved = slot;
    slot = saved + eps;
    const double up = BatchLoss(probe, batch, kl_weight).total;
    slot = saved - eps;
    const double down = BatchLoss(probe, batch, kl_weight).total;
    slot = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  };
  for (std::size_t l = 0; l < probe_layers.size(); ++l) {
    Dense& layer = *probe_layers[l];
    const Dense& g = *grad_layers[l];
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) check(layer.weight.data()[i], g.weight.data()[i]);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) check(layer.bias(i), g.bias(i));
  }
  return worst;
}

double ReconstructionMse(const EncoderParams& params, std::span<const ProsodyFeatures> data) {
  if (data.empty()) Fail(ErrorCode::kEmptyDataset, "no vectors");
  Batch batch;
  batch.inputs.resize(static_cast<Eigen::Index>(kProsodyDims), static_cast<Eigen::Index>(data.size()));
  for (std::size_t n = 0; n < data.size(); ++n) {
    for (std::size_t k = 0; k < kProsodyDims; ++k) batch.inputs(k, n) = data[n][k];
  }
  batch.noise = MatrixXd::Zero(params.latent, batch.inputs.cols());
  return BatchLoss(params, batch, 0.0).recon;
}

TrainResult Train(std::span<const ProsodyFeatures> dataset, const TrainConfig& cfg) {
  cfg.Validate();
  if (dataset.empty()) Fail(ErrorCode::kEmptyDataset, "training dataset is empty");
  for (const auto& x : dataset) {
    if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
      Fail(ErrorCode::kNonFiniteInput, "training vector has non-finite values");
    }
  }
  std::mt19937_64 rng(cfg.seed);
  TrainResult result;
  result.params = EncoderParams::Random(cfg.hidden, cfg.latent, rng);
  result.initial_recon = ReconstructionMse(result.params, dataset);
  result.history.reserve(static_cast<std::size_t>(cfg.iterations));

  std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  Batch batch;
  batch.inputs.resize(static_cast<Eigen::Index>(kProsodyDims), cfg.batch_size);
  batch.noise.resize(cfg.latent, cfg.batch_size);
  EncoderParams grad;
  for (std::int64_t it = 0; it < cfg.iterations; ++it) {
    for (int n = 0; n < cfg.batch_size; ++n) {
      const auto& x = dataset[pick(rng)];
      for (std::size_t k = 0; k < kProsodyDims; ++k) batch.inputs(k, n) = x[k];
    }
    for (Eigen::Index i = 0; i < batch.noise.size(); ++i) batch.noise.data()[i] = normal(rng);

    const double weight = KlWeight(it, cfg);
    const LossTerms loss = BatchLossAndGradient(result.params, batch, weight, &grad);
    if (!std::isfinite(loss.total)) {
      Fail(ErrorCode::kDivergedLoss, "non-finite loss at iteration " + std::to_string(it));
    }
    result.history.push_back({it, loss.recon, loss.kl, cfg.anneal ? KlScale(it, cfg) : 1.0,
                              KlActive(it, cfg)});
    auto layers = result.params.Layers();
    auto grads = grad.Layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      layers[l]->weight -= cfg.learning_rate * grads[l]->weight;
      layers[l]->bias -= cfg.learning_rate * grads[l]->bias;
    }
  }
  result.final_recon = ReconstructionMse(result.params, dataset);
  if (!std::isfinite(result.final_recon)) {
    Fail(ErrorCode::kDivergedLoss, "non-finite reconstruction after training");
  }
  return result;
}

std::vector<ProsodyFeatures> FeaturesOf(std::span<const ProsodyVector> vectors) {
  std::vector<ProsodyFeatures> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) out.push_back(v.Numeric());
  return out;
}

MatrixXd ConcatEmbeddings(const MatrixXd& linguistic, const MatrixXd& prosody) {
  if (linguistic.rows() != prosody.rows()) {
    Fail(ErrorCode::kLengthMismatch, "sequence lengths " + std::to_string(linguistic.rows()) +
                                         " and " + std::to_string(prosody.rows()) + " differ");
  }
  MatrixXd out(linguistic.rows(), linguistic.cols() + prosody.cols());
  out << linguistic, prosody;
  return out;
}

std::string ParamsToJson(const EncoderParams& params) {
  json j;
  j["input_dim"] = kProsodyDims;
  j["hidden"] = params.hidden;
  j["latent"] = params.latent;
  j["activation"] = "tanh";
  auto layers = params.Layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    j["layers"].push_back(DenseJson(kLayerNames[l], *layers[l]));
  }
  return j.dump() + "\n";
}

EncoderParams ParamsFromJson(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("input_dim").get<std::size_t>() != kProsodyDims) {
      Fail(ErrorCode::kDimMismatch, "params input_dim must be 7");
    }
    EncoderParams p = EncoderParams::Zeros(j.at("hidden").get<int>(), j.at("latent").get<int>());
    const auto& layers = j.at("layers");
    auto slots = p.Layers();
    if (layers.size() != slots.size()) Fail(ErrorCode::kDimMismatch, "expected 5 layers");
    for (std::size_t l = 0; l < slots.size(); ++l) DenseFrom(layers[l], kLayerNames[l], *slots[l]);
    return p;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("params json: ") + e.what());
  }
}

std::string TrainConfigToJson(const TrainConfig& cfg) {
  json j{{"kl_start_iter", cfg.kl_start_iter}, {"kl_end_iter", cfg.kl_end_iter},
         {"kl_period", cfg.kl_period},         {"learning_rate", cfg.learning_rate},
         {"iterations", cfg.iterations},       {"seed", cfg.seed},
         {"batch_size", cfg.batch_size},       {"hidden", cfg.hidden},
         {"latent", cfg.latent},               {"anneal", cfg.anneal}};
  return j.dump(2) + "\n";
}

TrainConfig TrainConfigFromJson(std::string_view text) {
  try {
    const json j = json::parse(text);
    TrainConfig cfg;
    cfg.kl_start_iter = j.value("kl_start_iter", cfg.kl_start_iter);
    cfg.kl_end_iter = j.value("kl_end_iter", cfg.kl_end_iter);
    cfg.kl_period = j.value("kl_period", cfg.kl_period);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.iterations = j.value("iterations", cfg.iterations);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.hidden = j.value("hidden", cfg.hidden);
    cfg.latent = j.value("latent", cfg.latent);
    cfg.anneal = j.value("anneal", cfg.anneal);
    cfg.Validate();
    return cfg;
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("train config json: ") + e.what());
  }
}

std::string HistoryToCsv(std::span<const HistoryRow> history) {
  std::string out = "iteration,recon,kl,scale,active\n";
  for (const auto& row : history) {
    out += std::to_string(row.iteration) + ',' + FormatShortest(row.recon) + ',' +
           FormatShortest(row.kl) + ',' + FormatShortest(row.scale) + ',' +
           (row.active ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace prosoref
