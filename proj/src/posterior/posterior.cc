// Copyright (c) 2026 The SVS Toolkit Authors
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

#include "svs/posterior/posterior.h"

#include "svs/posterior/ctc.h"

namespace svs::posterior {

using nn::Tensor;

PosteriorEncoder::PosteriorEncoder(nn::ParameterStore& store, Rng& rng,
                                   const PosteriorConfig& config)
    : config_(config),
      pre_(store, rng, "posterior.pre", config.in_channels, config.hidden, 1) {
  int dilation = 1;
  for (int i = 0; i < config.layers; ++i) {
    const std::string name = "posterior.layer" + std::to_string(i);
    in_layers_.emplace_back(store, rng, name + ".in", config.hidden,
                            2 * config.hidden, config.kernel, dilation);
    const int out = i + 1 < config.layers ? 2 * config.hidden : config.hidden;
    res_skip_.emplace_back(store, rng, name + ".res_skip", config.hidden, out, 1);
    dilation *= config.dilation_rate;
  }
  proj_ = nn::Conv1d(store, rng, "posterior.proj", config.hidden,
                     2 * config.latent, 1);
}

LatentPosterior PosteriorEncoder::encode(const Tensor& linear_spec,
                                         const Tensor& mask, Rng& rng,
                                         double noise_scale) const {
  require(linear_spec.cols() == config_.in_channels,
          "posterior encode: expected " + std::to_string(config_.in_channels) +
              " spectrogram bins, got " + std::to_string(linear_spec.cols()));
  require(mask.rows() == linear_spec.rows() && mask.cols() == 1,
          "posterior encode: mask does not match frame count");
  const Eigen::Index h = config_.hidden;
  Tensor x = nn::mul_col(pre_(linear_spec), mask);
  Tensor skip;
  for (size_t i = 0; i < in_layers_.size(); ++i) {
    Tensor a = in_layers_[i](x);
    Tensor acts = nn::mul(nn::tanh(nn::slice_cols(a, 0, h)),
                          nn::sigmoid(nn::slice_cols(a, h, h)));
    Tensor rs = res_skip_[i](acts);
    if (i + 1 < in_layers_.size()) {
      x = nn::mul_col(nn::add(x, nn::slice_cols(rs, 0, h)), mask);
      Tensor s = nn::slice_cols(rs, h, h);
      skip = skip.defined() ? nn::add(skip, s) : s;
    } else {
      skip = skip.defined() ? nn::add(skip, rs) : rs;
    }
  }
  Tensor stats = nn::mul_col(proj_(nn::mul_col(skip, mask)), mask);
  const Eigen::Index d = config_.latent;
  LatentPosterior out;
  out.mean = nn::slice_cols(stats, 0, d);
  out.log_var = nn::slice_cols(stats, d, d);
  Matrix eps = rng.normal_matrix<Real>(linear_spec.rows(), d, noise_scale);
  out.eps = eps;
  Tensor noise = nn::mul(nn::exp(nn::scale(out.log_var, 0.5f)),
                         nn::constant(std::move(eps)));
  out.z = nn::mul_col(nn::add(out.mean, noise), mask);
  return out;
}

PhonemePredictor::PhonemePredictor(nn::ParameterStore& store, Rng& rng,
                                   const PhonemePredictorConfig& config)
    : config_(config),
      blocks_(store, rng, "phoneme_predictor.fft", config.layers,
              {config.channels, config.ffn_channels, config.heads, config.kernel},
              config.positional),
      head_(store, rng, "phoneme_predictor.head", config.channels,
            config.classes) {}

PhonemeProbMatrix PhonemePredictor::predict_phonemes(const Tensor& z,
                                                     const Tensor& mask) const {
  require(z.cols() == config_.channels,
          "predict_phonemes: latent width mismatch");
  PhonemeProbMatrix out;
  out.log_probs = nn::log_softmax_rows(head_(blocks_(z, mask)));
  out.probs = nn::exp(out.log_probs);
  return out;
}

Tensor ctc_loss(const Tensor& log_probs, std::span<const int> target,
                Eigen::Index input_len, int blank) {
  const MatrixT<double> lp = log_probs.value().cast<double>();
  auto result = posterior::ctc_loss(lp, target, input_len,
                                    static_cast<Eigen::Index>(target.size()),
                                    blank, log_probs.requires_grad());
  Matrix value(1, 1);
  value(0, 0) = static_cast<Real>(result.loss);
  Matrix grad = result.grad.cast<Real>();
  return Tensor::from_op(std::move(value), {log_probs},
                         [grad = std::move(grad)](nn::Node& n) {
                           n.inputs[0]->accumulate(grad * n.grad(0, 0));
                         });
}

Tensor probs_to_embeddings(const Tensor& probs, const Tensor& table) {
  require(probs.cols() == table.rows(),
          "probs_to_embeddings: " + std::to_string(probs.cols()) +
              " classes but table has " + std::to_string(table.rows()) +
              " rows");
  return nn::matmul(probs, table);
}

}  // namespace svs::posterior
