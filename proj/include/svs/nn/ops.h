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

#ifndef SVS_NN_OPS_H_
#define SVS_NN_OPS_H_

#include <span>
#include <vector>

#include "svs/nn/tensor.h"

namespace svs::nn {

// Arithmetic. Binary ops require identical shapes unless the name says
// otherwise (_row broadcasts a [1 x C] operand, _col a [T x 1] operand).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, Real s);
Tensor add_scalar(const Tensor& a, Real s);
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add_row(const Tensor& a, const Tensor& row);
Tensor mul_row(const Tensor& a, const Tensor& row);
Tensor add_col(const Tensor& a, const Tensor& col);
Tensor mul_col(const Tensor& a, const Tensor& col);
Tensor broadcast_rows(const Tensor& row, Eigen::Index rows);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, Real s) { return scale(a, s); }
inline Tensor operator*(Real s, const Tensor& a) { return scale(a, s); }

// Elementwise functions.
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor log_clamped(const Tensor& a, Real floor);
Tensor sqrt_clamped(const Tensor& a, Real floor);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor log_sigmoid(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, Real slope = 0.1f);
Tensor square(const Tensor& a);
Tensor abs(const Tensor& a);
Tensor sin(const Tensor& a);

// Reductions.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor sum_rows(const Tensor& a);   // [T x C] -> [1 x C]
Tensor mean_rows(const Tensor& a);  // [T x C] -> [1 x C]
Tensor sum_cols(const Tensor& a);   // [T x C] -> [T x 1]

// Normalization.
Tensor softmax_rows(const Tensor& a);
Tensor log_softmax_rows(const Tensor& a);
Tensor softmax_cols(const Tensor& a);
Tensor layer_norm_rows(const Tensor& x, const Tensor& gamma,
                       const Tensor& beta, Real eps = 1e-5f);

// Shape manipulation.
Tensor slice_rows(const Tensor& a, Eigen::Index start, Eigen::Index count);
Tensor slice_cols(const Tensor& a, Eigen::Index start, Eigen::Index count);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor flip_cols(const Tensor& a);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, Eigen::Index rows, Eigen::Index cols);
Tensor gather_rows(const Tensor& table, std::span<const int> ids);
Tensor detach(const Tensor& a);

struct ConvGeometry {
  int kernel = 1;
  int stride = 1;
  int dilation = 1;
  int pad_left = 0;
  int pad_right = 0;

  // Output length equals ceil(T / stride) for odd receptive fields.
  static ConvGeometry same(int kernel, int dilation = 1, int stride = 1);
  Eigen::Index output_length(Eigen::Index input_length) const;
};

// x: [T x Cin], weight: [K*Cin x Cout] (row k*Cin + c), bias: [1 x Cout].
Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              const ConvGeometry& geom);

// x: [T x Cin], weight: [Cin x K*Cout], bias: [1 x Cout].
// Output length (T - 1) * stride + K - 2 * padding.
Tensor conv_transpose1d(const Tensor& x, const Tensor& weight,
                        const Tensor& bias, int kernel, int stride,
                        int padding);

// Average pooling over rows with zero padding counted in the average.
Tensor avg_pool_rows(const Tensor& x, int kernel, int stride, int padding);

// [N x 1] signal -> [F x frame_len] frames with reflect padding of
// frame_len / 2 on both ends; F = floor(N / hop) + 1.
Tensor frame_signal(const Tensor& x, int frame_len, int hop);

}  // namespace svs::nn

#endif  // SVS_NN_OPS_H_
