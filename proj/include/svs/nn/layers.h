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

#ifndef SVS_NN_LAYERS_H_
#define SVS_NN_LAYERS_H_

#include <string>
#include <vector>

#include "svs/nn/ops.h"
#include "svs/nn/parameters.h"

namespace svs::nn {

// Per-frame validity as a [T x 1] column of 0/1.
Tensor ones_mask(Eigen::Index frames);
Tensor mask_from_lengths(Eigen::Index frames, Eigen::Index valid);

class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, Rng& rng, const std::string& name,
         Eigen::Index in, Eigen::Index out, Init init = Init::kUniformFanIn);
  Tensor operator()(const Tensor& x) const;

  Tensor weight;
  Tensor bias;
};

class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(ParameterStore& store, Rng& rng, const std::string& name,
         Eigen::Index in, Eigen::Index out, int kernel, int dilation = 1,
         int stride = 1, Init init = Init::kUniformFanIn);
  Tensor operator()(const Tensor& x) const;

  Tensor weight;
  Tensor bias;
  ConvGeometry geometry;
};

class ConvTranspose1d {
 public:
  ConvTranspose1d() = default;
  // Upsamples by `stride` exactly when kernel = 2 * stride.
  ConvTranspose1d(ParameterStore& store, Rng& rng, const std::string& name,
                  Eigen::Index in, Eigen::Index out, int stride);
  Tensor operator()(const Tensor& x) const;

  Tensor weight;
  Tensor bias;
  int kernel = 0;
  int stride = 0;
  int padding = 0;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterStore& store, const std::string& name, Eigen::Index dim);
  Tensor operator()(const Tensor& x) const;

  Tensor gamma;
  Tensor beta;
};

class Embedding {
 public:
  Embedding() = default;
  Embedding(ParameterStore& store, Rng& rng, const std::string& name,
            Eigen::Index count, Eigen::Index dim);
  Tensor operator()(std::span<const int> ids) const;

  Tensor table;
};

class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterStore& store, Rng& rng, const std::string& name,
                     Eigen::Index dim, int heads);
  Tensor operator()(const Tensor& x, const Tensor& mask) const;

 private:
  Linear qkv_;
  Linear out_;
  int heads_ = 1;
  Eigen::Index dim_ = 0;
};

struct FFTBlockConfig {
  Eigen::Index channels = 192;
  Eigen::Index ffn_channels = 384;
  int heads = 2;
  int kernel = 3;
};

// Feed-forward Transformer block: self-attention and a convolutional
// feed-forward net, each wrapped in residual + post layer norm.
class FFTBlock {
 public:
  FFTBlock() = default;
  FFTBlock(ParameterStore& store, Rng& rng, const std::string& name,
           const FFTBlockConfig& config);
  Tensor operator()(const Tensor& x, const Tensor& mask) const;

 private:
  MultiHeadAttention attention_;
  LayerNorm norm1_;
  Conv1d ffn_in_;
  Conv1d ffn_out_;
  LayerNorm norm2_;
};

class FFTStack {
 public:
  FFTStack() = default;
  FFTStack(ParameterStore& store, Rng& rng, const std::string& name,
           int layers, const FFTBlockConfig& config, bool positional);
  Tensor operator()(const Tensor& x, const Tensor& mask) const;

 private:
  std::vector<FFTBlock> blocks_;
  bool positional_ = true;
};

Matrix sinusoidal_positions(Eigen::Index frames, Eigen::Index dim);

}  // namespace svs::nn

#endif  // SVS_NN_LAYERS_H_
