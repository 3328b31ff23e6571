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

#include "svs/prior/speaker_encoder.h"

namespace svs::prior {

using nn::Tensor;

SpeakerEncoder::SpeakerEncoder(nn::ParameterStore& store, Rng& rng,
                               const SpeakerEncoderConfig& config)
    : config_(config),
      front_(store, rng, "speaker_encoder.front", config.n_mels,
             config.channels, 5) {
  const int c = config.channels;
  const int bottleneck = c / 2;
  for (size_t i = 0; i < config.dilations.size(); ++i) {
    const std::string name = "speaker_encoder.block" + std::to_string(i);
    Block b;
    b.reduce = nn::Conv1d(store, rng, name + ".reduce", c, bottleneck, 1);
    b.dilated = nn::Conv1d(store, rng, name + ".dilated", bottleneck,
                           bottleneck, 3, config.dilations[i]);
    b.expand = nn::Conv1d(store, rng, name + ".expand", bottleneck, c, 1);
    b.se_down = nn::Linear(store, rng, name + ".se_down", c, c / 4);
    b.se_up = nn::Linear(store, rng, name + ".se_up", c / 4, c);
    blocks_.push_back(std::move(b));
  }
  const int agg = c * static_cast<int>(config.dilations.size());
  aggregate_ = nn::Conv1d(store, rng, "speaker_encoder.aggregate", agg, agg, 1);
  attention_hidden_ = nn::Conv1d(store, rng, "speaker_encoder.asp_hidden",
                                 3 * agg, config.attention_channels, 1);
  attention_out_ = nn::Conv1d(store, rng, "speaker_encoder.asp_out",
                              config.attention_channels, agg, 1);
  pooled_proj_ = nn::Linear(store, rng, "speaker_encoder.pooled_proj", 2 * agg,
                            config.embedding);
  pooled_norm_ = nn::LayerNorm(store, "speaker_encoder.pooled_norm",
                               config.embedding);
  frame_proj_ = nn::Linear(store, rng, "speaker_encoder.frame_proj", agg,
                           config.embedding);
}

SpeakerEmbedding SpeakerEncoder::speaker_encode(const Tensor& mel) const {
  return speaker_encode(mel, nn::ones_mask(mel.rows()));
}

SpeakerEmbedding SpeakerEncoder::speaker_encode(const Tensor& mel,
                                                const Tensor& mask) const {
  require(mel.cols() == config_.n_mels,
          "speaker_encode: expected " + std::to_string(config_.n_mels) +
              " mel bands, got " + std::to_string(mel.cols()));
  require(mask.value().sum() >= config_.min_frames,
          "speaker_encode: input too short (" +
              std::to_string(static_cast<int>(mask.value().sum())) +
              " frames, need " + std::to_string(config_.min_frames) + ")");

  const Real valid = mask.value().sum();
  auto masked_mean = [&](const Tensor& x) {
    return nn::scale(nn::sum_rows(nn::mul_col(x, mask)), Real(1) / valid);
  };

  Tensor h = nn::mul_col(nn::relu(front_(mel)), mask);
  std::vector<Tensor> outs;
  for (const auto& b : blocks_) {
    Tensor y = nn::relu(b.reduce(h));
    y = nn::mul_col(nn::relu(b.dilated(y)), mask);
    y = b.expand(y);
    Tensor gate = nn::sigmoid(b.se_up(nn::relu(b.se_down(masked_mean(y)))));
    h = nn::mul_col(nn::add(h, nn::mul_row(y, gate)), mask);
    outs.push_back(h);
  }
  Tensor feats = nn::mul_col(nn::relu(aggregate_(nn::concat_cols(outs))), mask);

  // Attentive statistics pooling with global context.
  const Eigen::Index frames = feats.rows();
  Tensor mu_g = masked_mean(feats);
  Tensor var_g = nn::sub(masked_mean(nn::square(feats)), nn::square(mu_g));
  Tensor sigma_g = nn::sqrt_clamped(var_g, 1e-6f);
  Tensor context = nn::concat_cols({feats, nn::broadcast_rows(mu_g, frames),
                                    nn::broadcast_rows(sigma_g, frames)});
  Tensor scores = attention_out_(nn::tanh(attention_hidden_(context)));
  Matrix bias = Matrix::Zero(frames, scores.cols());
  for (Eigen::Index t = 0; t < frames; ++t)
    if (mask.value()(t, 0) <= 0) bias.row(t).setConstant(-1e4f);
  Tensor alpha = nn::softmax_cols(nn::add(scores, nn::constant(std::move(bias))));
  Tensor mu = nn::sum_rows(nn::mul(alpha, feats));
  Tensor second = nn::sum_rows(nn::mul(alpha, nn::square(feats)));
  Tensor sigma = nn::sqrt_clamped(nn::sub(second, nn::square(mu)), 1e-6f);

  SpeakerEmbedding out;
  out.vec = pooled_norm_(pooled_proj_(nn::concat_cols({mu, sigma})));
  out.frame_vecs = nn::mul_col(frame_proj_(feats), mask);
  return out;
}

Matrix mean_embedding(const std::vector<Matrix>& pooled) {
  require(!pooled.empty(), "average_speaker_embedding: empty corpus");
  Eigen::Matrix<double, 1, Eigen::Dynamic> acc =
      Eigen::Matrix<double, 1, Eigen::Dynamic>::Zero(pooled.front().cols());
  for (const auto& p : pooled) {
    require(p.rows() == 1 && p.cols() == acc.cols(),
            "average_speaker_embedding: embedding shape mismatch");
    acc += p.row(0).cast<double>();
  }
  acc /= static_cast<double>(pooled.size());
  return acc.cast<Real>();
}

SpeakerEmbedding average_speaker_embedding(const SpeakerEncoder& encoder,
                                           const std::vector<Matrix>& mels) {
  require(!mels.empty(), "average_speaker_embedding: empty corpus");
  nn::NoGradGuard no_grad;
  std::vector<Matrix> pooled;
  for (const auto& mel : mels)
    pooled.push_back(encoder.speaker_encode(nn::constant(mel)).vec.value());
  SpeakerEmbedding out;
  out.vec = nn::constant(mean_embedding(pooled));
  return out;
}

}  // namespace svs::prior
