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

#ifndef PROSOREF_VAE_H_
#define PROSOREF_VAE_H_

// Variational reference encoder over aggregated per-phoneme prosody.
//
// The encoder is a tanh MLP 7 -> H -> H -> 2D whose output splits into the
// posterior mean and log standard deviation of a D-dimensional prosody
// embedding. A decoder D -> H -> 7 reconstructs the input from a
// reparameterized sample; training minimizes reconstruction MSE plus the
// annealed, periodically gated KL divergence to a standard normal prior.

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "prosoref/prosody.h"

namespace prosoref {

inline constexpr double kLogSigmaMin = -10.0;
inline constexpr double kLogSigmaMax = 10.0;

using ProsodyFeatures = std::array<double, kProsodyDims>;

// y = W x + b, applied column-wise.
struct Dense {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;

  Eigen::MatrixXd Forward(const Eigen::MatrixXd& x) const;
  // Accumulates parameter gradients and returns dL/dx.
  Eigen::MatrixXd Backward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& grad_y,
                           Dense* grad) const;
  std::size_t size() const { return weight.size() + bias.size(); }
};

struct EncoderParams {
  int hidden = 32;
  int latent = 8;
  Dense enc1, enc2, enc_out;  // enc_out rows: [mu; log_sigma]
  Dense dec1, dec_out;

  static EncoderParams Zeros(int hidden, int latent);
  // Weights ~ N(0, 1/fan_in); biases ~ N(0, bias_scale^2).
  static EncoderParams Random(int hidden, int latent, std::mt19937_64& rng,
                              double bias_scale = 0.0);

  std::vector<Dense*> Layers();
  std::vector<const Dense*> Layers() const;
  std::size_t ParameterCount() const;
};

struct GaussianPosterior {
  Eigen::VectorXd mu;
  Eigen::VectorXd log_sigma;

  Eigen::VectorXd sigma() const { return log_sigma.array().exp().matrix(); }
};

GaussianPosterior Encode(const EncoderParams& params, std::span<const double> x);
Eigen::VectorXd Decode(const EncoderParams& params, const Eigen::VectorXd& z);

// z = mu + sigma * eps with eps drawn from `rng`.
Eigen::VectorXd ReparamSample(const GaussianPosterior& post, std::mt19937_64& rng);

// KL(N(mu, sigma^2) || N(0, I)) = 0.5 * sum(mu^2 + sigma^2 - 1 - 2 log sigma).
double KlDivergence(const GaussianPosterior& post);

struct TrainConfig {
  std::int64_t kl_start_iter = 25000;
  std::int64_t kl_end_iter = 150000;
  std::int64_t kl_period = 200;
  double learning_rate = 1e-3;
  std::int64_t iterations = 5000;
  std::uint64_t seed = 0;
  int batch_size = 32;
  int hidden = 32;
  int latent = 8;
  // false: the KL weight is 1 from the first iteration (still gated).
  bool anneal = true;

  void Validate() const;
};

// 0 before kl_start_iter, linear ramp, 1 from kl_end_iter on.
double KlScale(std::int64_t iteration, const TrainConfig& cfg);
// True on multiples of kl_period.
bool KlActive(std::int64_t iteration, const TrainConfig& cfg);
// Weight actually applied to the KL term at `iteration`.
double KlWeight(std::int64_t iteration, const TrainConfig& cfg);

// Columns are samples: inputs is 7 x B, noise is D x B.
struct Batch {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd noise;
};

struct LossTerms {
  double recon = 0.0;  // mean squared error per element
  double kl = 0.0;     // mean KL per sample
  double total = 0.0;  // recon + kl_weight * kl
};

LossTerms BatchLoss(const EncoderParams& params, const Batch& batch, double kl_weight);
// Fills `grad` (reshaped to match params) with d total / d params.
LossTerms BatchLossAndGradient(const EncoderParams& params, const Batch& batch, double kl_weight,
                               EncoderParams* grad);

// Largest |analytic - numeric| / max(|analytic|, |numeric|, kGradCheckFloor)
// over every parameter, using central differences of step `eps`.
inline constexpr double kGradCheckFloor = 1e-6;
double GradCheck(const EncoderParams& params, const Batch& batch, double kl_weight,
                 double eps = 1e-5);

// Reconstruction MSE over the dataset decoding the posterior mean.
double ReconstructionMse(const EncoderParams& params, std::span<const ProsodyFeatures> data);

struct HistoryRow {
  std::int64_t iteration = 0;
  double recon = 0.0;
  double kl = 0.0;
  double scale = 0.0;
  bool active = false;

  bool operator==(const HistoryRow&) const = default;
};

struct TrainResult {
  EncoderParams params;
  std::vector<HistoryRow> history;
  double initial_recon = 0.0;
  double final_recon = 0.0;
};

TrainResult Train(std::span<const ProsodyFeatures> dataset, const TrainConfig& cfg);

std::vector<ProsodyFeatures> FeaturesOf(std::span<const ProsodyVector> vectors);

// Row-wise [linguistic | prosody].
Eigen::MatrixXd ConcatEmbeddings(const Eigen::MatrixXd& linguistic, const Eigen::MatrixXd& prosody);

std::string ParamsToJson(const EncoderParams& params);
EncoderParams ParamsFromJson(std::string_view text);
std::string TrainConfigToJson(const TrainConfig& cfg);
TrainConfig TrainConfigFromJson(std::string_view text);
std::string HistoryToCsv(std::span<const HistoryRow> history);

}  // namespace prosoref

#endif  // PROSOREF_VAE_H_
