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

#include "svs/nn/layers.h"

#include <cmath>

namespace svs::nn {

Tensor ones_mask(Eigen::Index frames) {
  return constant(Matrix::Ones(frames, 1));
}

Tensor mask_from_lengths(Eigen::Index frames, Eigen::Index valid) {
  require(valid >= 0 && valid <= frames, "mask length out of range");
  Matrix m = Matrix::Zero(frames, 1);
  m.topRows(valid).setOnes();
  return constant(std::move(m));
}

Linear::Linear(ParameterStore& store, Rng& rng, const std::string& name,
               Eigen::Index in, Eigen::Index out, Init init) {
  weight = store.create(name + ".weight", init_matrix(rng, in, out, in, init));
  bias = store.create(name + ".bias", Matrix::Zero(1, out));
}

Tensor Linear::operator()(const Tensor& x) const {
  return add_row(matmul(x, weight), bias);
}

Conv1d::Conv1d(ParameterStore& store, Rng& rng, const std::string& name,
               Eigen::Index in, Eigen::Index out, int kernel, int dilation,
               int stride, Init init)
    : geometry(ConvGeometry::same(kernel, dilation, stride)) {
  weight = store.create(name + ".weight",
                        init_matrix(rng, kernel * in, out, kernel * in, init));
  bias = store.create(name + ".bias", Matrix::Zero(1, out));
}

Tensor Conv1d::operator()(const Tensor& x) const {
  return conv1d(x, weight, bias, geometry);
}

ConvTranspose1d::ConvTranspose1d(ParameterStore& store, Rng& rng,
                                 const std::string& name, Eigen::Index in,
                                 Eigen::Index out, int stride_)
    : kernel(2 * stride_), stride(stride_), padding(stride_ / 2) {
  weight = store.create(
      name + ".weight",
      init_matrix(rng, in, kernel * out, in * kernel / stride, Init::kUniformFanIn));
  bias = store.create(name + ".bias", Matrix::Zero(1, out));
}

Tensor ConvTranspose1d::operator()(const Tensor& x) const {
  return conv_transpose1d(x, weight, bias, kernel, stride, padding);
}

LayerNorm::LayerNorm(ParameterStore& store, const std::string& name,
                     Eigen::Index dim) {
  gamma = store.create(name + ".gamma", Matrix::Ones(1, dim));
  beta = store.create(name + ".beta", Matrix::Zero(1, dim));
}

Tensor LayerNorm::operator()(const Tensor& x) const {
  return layer_norm_rows(x, gamma, beta);
}

Embedding::Embedding(ParameterStore& store, Rng& rng, const std::string& name,
                     Eigen::Index count, Eigen::Index dim) {
  table = store.create(name + ".table",
                       rng.normal_matrix<Real>(count, dim, 1.0 / std::sqrt(dim)));
}

Tensor Embedding::operator()(std::span<const int> ids) const {
  return gather_rows(table, ids);
}

MultiHeadAttention::MultiHeadAttention(ParameterStore& store, Rng& rng,
                                       const std::string& name,
                                       Eigen::Index dim, int heads)
    : qkv_(store, rng, name + ".qkv", dim, 3 * dim),
      out_(store, rng, name + ".out", dim, dim),
      heads_(heads),
      dim_(dim) {
  require(dim % heads == 0, "attention width must divide by head count");
}

Tensor MultiHeadAttention::operator()(const Tensor& x,
                                      const Tensor& mask) const {
  const Eigen::Index frames = x.rows();
  const Eigen::Index head_dim = dim_ / heads_;
  const Real inv_sqrt = Real(1) / std::sqrt(static_cast<Real>(head_dim));

  // Keys outside the mask get a large negative score.
  Matrix key_bias(frames, frames);
  for (Eigen::Index j = 0; j < frames; ++j)
    key_bias.col(j).setConstant(mask.value()(j, 0) > 0 ? Real(0) : Real(-1e4));
  const Tensor bias = constant(std::move(key_bias));

  const Tensor qkv = qkv_(x);
  std::vector<Tensor> heads;
  for (int h = 0; h < heads_; ++h) {
    Tensor q = slice_cols(qkv, h * head_dim, head_dim);
    Tensor k = slice_cols(qkv, dim_ + h * head_dim, head_dim);
    Tensor v = slice_cols(qkv, 2 * dim_ + h * head_dim, head_dim);
    Tensor scores = add(scale(matmul(q, transpose(k)), inv_sqrt), bias);
    heads.push_back(matmul(softmax_rows(scores), v));
  }
  return out_(concat_cols(heads));
}

FFTBlock::FFTBlock(ParameterStore& store, Rng& rng, const std::string& name,
                   const FFTBlockConfig& config)
    : attention_(store, rng, name + ".attn", config.channels, config.heads),
      norm1_(store, name + ".norm1", config.channels),
      ffn_in_(store, rng, name + ".ffn_in", config.channels,
              config.ffn_channels, config.kernel),
      ffn_out_(store, rng, name + ".ffn_out", config.ffn_channels,
               config.channels, config.kernel),
      norm2_(store, name + ".norm2", config.channels) {}

Tensor FFTBlock::operator()(const Tensor& x, const Tensor& mask) const {
  Tensor h = norm1_(add(x, attention_(x, mask)));
  h = mul_col(h, mask);
  Tensor ff = ffn_out_(mul_col(relu(ffn_in_(h)), mask));
  return mul_col(norm2_(add(h, ff)), mask);
}

FFTStack::FFTStack(ParameterStore& store, Rng& rng, const std::string& name,
                   int layers, const FFTBlockConfig& config, bool positional)
    : positional_(positional) {
  for (int i = 0; i < layers; ++i)
    blocks_.emplace_back(store, rng, name + ".block" + std::to_string(i),
                         config);
}

Tensor FFTStack::operator()(const Tensor& x, const Tensor& mask) const {
  Tensor h = x;
  if (positional_)
    h = add(h, constant(sinusoidal_positions(x.rows(), x.cols())));
  h = mul_col(h, mask);
  for (const auto& block : blocks_) h = block(h, mask);
  return h;
}

Matrix sinusoidal_positions(Eigen::Index frames, Eigen::Index dim) {
  Matrix pe(frames, dim);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double rate =
          std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / dim);
      pe(t, i) = static_cast<Real>(i % 2 == 0 ? std::sin(t * rate)
                                              : std::cos(t * rate));
    }
  }
  return pe;
}

}  // namespace svs::nn
