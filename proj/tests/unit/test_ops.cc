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

#include <gtest/gtest.h>

#include "gradcheck.h"
#include "svs/nn/layers.h"
#include "svs/nn/ops.h"
#include "svs/nn/optim.h"

namespace svs::nn {
namespace {

using testing::directional_grad_error;

Matrix random(Eigen::Index r, Eigen::Index c, uint64_t seed, double lo = -1,
              double hi = 1) {
  Rng rng(seed);
  return rng.uniform_matrix<Real>(r, c, lo, hi);
}

// Weighted sum so every output element carries a distinct cotangent.
Tensor probe(const Tensor& y, uint64_t seed = 99) {
  return sum(mul(y, constant(random(y.rows(), y.cols(), seed))));
}

constexpr double kTol = 2e-2;

TEST(OpsGrad, Elementwise) {
  using Fn = Tensor (*)(const Tensor&);
  const std::vector<std::pair<const char*, Fn>> fns = {
      {"exp", [](const Tensor& x) { return exp(x); }},
      {"tanh", [](const Tensor& x) { return tanh(x); }},
      {"sigmoid", [](const Tensor& x) { return sigmoid(x); }},
      {"log_sigmoid", [](const Tensor& x) { return log_sigmoid(x); }},
      {"softplus", [](const Tensor& x) { return softplus(x); }},
      {"square", [](const Tensor& x) { return square(x); }},
      {"sin", [](const Tensor& x) { return sin(x); }},
      {"softmax_rows", [](const Tensor& x) { return softmax_rows(x); }},
      {"log_softmax_rows", [](const Tensor& x) { return log_softmax_rows(x); }},
      {"softmax_cols", [](const Tensor& x) { return softmax_cols(x); }},
      {"transpose", [](const Tensor& x) { return transpose(x); }},
      {"flip_cols", [](const Tensor& x) { return flip_cols(x); }},
      {"sum_rows", [](const Tensor& x) { return sum_rows(x); }},
      {"mean_rows", [](const Tensor& x) { return mean_rows(x); }},
      {"sum_cols", [](const Tensor& x) { return sum_cols(x); }},
  };
  for (const auto& [name, fn] : fns) {
    auto f = [fn](const std::vector<Tensor>& in) { return probe(fn(in[0])); };
    EXPECT_LT(directional_grad_error(f, {random(5, 4, 1)}), kTol) << name;
  }
}

TEST(OpsGrad, PositiveDomain) {
  auto f = [](const std::vector<Tensor>& in) {
    return probe(add(log(in[0]), sqrt_clamped(in[0], 1e-6f)));
  };
  EXPECT_LT(directional_grad_error(f, {random(4, 3, 2, 0.5, 2.0)}), kTol);
}

TEST(OpsGrad, Binary) {
  auto f = [](const std::vector<Tensor>& in) {
    Tensor y = add(mul(in[0], in[1]), div(in[0], add_scalar(square(in[1]), 1)));
    return probe(sub(y, scale(in[1], 0.3f)));
  };
  EXPECT_LT(directional_grad_error(f, {random(3, 4, 3), random(3, 4, 4)}), kTol);
}

TEST(OpsGrad, Broadcasts) {
  auto f = [](const std::vector<Tensor>& in) {
    Tensor y = mul_row(add_row(in[0], in[1]), in[1]);
    y = mul_col(add_col(y, in[2]), in[2]);
    return probe(add(y, broadcast_rows(in[1], 5)));
  };
  EXPECT_LT(directional_grad_error(
                f, {random(5, 3, 5), random(1, 3, 6), random(5, 1, 7)}),
            kTol);
}

TEST(OpsGrad, Matmul) {
  auto f = [](const std::vector<Tensor>& in) {
    return probe(matmul(in[0], in[1]));
  };
  EXPECT_LT(directional_grad_error(f, {random(4, 6, 8), random(6, 3, 9)}), kTol);
}

TEST(OpsGrad, LayerNorm) {
  auto f = [](const std::vector<Tensor>& in) {
    return probe(layer_norm_rows(in[0], in[1], in[2]));
  };
  EXPECT_LT(directional_grad_error(
                f, {random(4, 8, 10), random(1, 8, 11, 0.5, 1.5), random(1, 8, 12)}),
            kTol);
}

TEST(OpsGrad, ShapeOps) {
  auto f = [](const std::vector<Tensor>& in) {
    Tensor a = slice_rows(in[0], 1, 3);
    Tensor b = slice_cols(in[0], 2, 2);
    Tensor c = concat_cols({a, slice_rows(b, 0, 3)});
    Tensor d = concat_rows({c, reshape(slice_rows(in[0], 0, 3), 2, 6)});
    const int ids[] = {3, 0, 0, 4};
    return add(probe(d), probe(gather_rows(in[0], ids), 5));
  };
  EXPECT_LT(directional_grad_error(f, {random(5, 4, 13)}), kTol);
}

TEST(OpsGrad, Conv) {
  for (const auto& g : {ConvGeometry::same(3), ConvGeometry::same(5, 2),
                        ConvGeometry::same(4, 1, 2), ConvGeometry::same(15, 1, 4)}) {
    auto f = [g](const std::vector<Tensor>& in) {
      return probe(conv1d(in[0], in[1], in[2], g));
    };
    EXPECT_LT(directional_grad_error(f, {random(11, 3, 14),
                                         random(g.kernel * 3, 2, 15),
                                         random(1, 2, 16)}),
              kTol)
        << g.kernel << " " << g.stride;
  }
}

TEST(OpsGrad, ConvTranspose) {
  auto f = [](const std::vector<Tensor>& in) {
    return probe(conv_transpose1d(in[0], in[1], in[2], 8, 4, 2));
  };
  EXPECT_LT(directional_grad_error(
                f, {random(5, 3, 17), random(3, 8 * 2, 18), random(1, 2, 19)}),
            kTol);
}

TEST(Ops, ConvTransposeLength) {
  Tensor x = constant(random(7, 2, 20));
  Tensor w = constant(random(2, 16 * 3, 21));
  Tensor b = constant(Matrix::Zero(1, 3));
  EXPECT_EQ(conv_transpose1d(x, w, b, 16, 8, 4).rows(), 56);
}

TEST(Ops, ConvMatchesDirectSum) {
  const Matrix x = random(6, 2, 22);
  const Matrix w = random(3 * 2, 1, 23);
  Tensor y = conv1d(constant(x), constant(w), constant(Matrix::Zero(1, 1)),
                    ConvGeometry::same(3));
  for (int t = 0; t < 6; ++t) {
    double expect = 0;
    for (int k = 0; k < 3; ++k) {
      const int src = t + k - 1;
      if (src < 0 || src >= 6) continue;
      for (int c = 0; c < 2; ++c) expect += x(src, c) * w(k * 2 + c, 0);
    }
    EXPECT_NEAR(y.value()(t, 0), expect, 1e-5);
  }
}

TEST(OpsGrad, PoolingAndFraming) {
  auto f = [](const std::vector<Tensor>& in) {
    return add(probe(avg_pool_rows(in[0], 4, 2, 2)),
               probe(frame_signal(in[0], 8, 4), 3));
  };
  EXPECT_LT(directional_grad_error(f, {random(20, 1, 24)}), kTol);
}

TEST(OpsGrad, Attention) {
  ParameterStore store;
  Rng rng(3);
  FFTBlock block(store, rng, "b", {8, 16, 2, 3});
  Matrix mask = Matrix::Ones(6, 1);
  mask(5, 0) = 0;
  auto f = [&](const std::vector<Tensor>& in) {
    return probe(block(in[0], constant(mask)));
  };
  EXPECT_LT(directional_grad_error(f, {random(6, 8, 25)}), kTol);
}

TEST(Tensor, BackwardAccumulatesSharedInputs) {
  Tensor x(Matrix::Constant(1, 1, 3.0f), true);
  backward(add(mul(x, x), x));
  EXPECT_FLOAT_EQ(x.grad()(0, 0), 7.0f);
}

TEST(Tensor, NoGradGuardSkipsTape) {
  Tensor x(Matrix::Constant(1, 1, 3.0f), true);
  NoGradGuard guard;
  Tensor y = mul(x, x);
  EXPECT_FALSE(y.requires_grad());
}

TEST(Optim, AdamWStepMovesAgainstGradient) {
  ParameterStore store;
  Tensor w = store.create("g.w", Matrix::Constant(1, 1, 1.0f));
  AdamW opt(store.tensors_in_groups({"g"}), {});
  backward(mul(w, w));
  opt.step(1e-2);
  EXPECT_LT(w.value()(0, 0), 1.0f);
}

}  // namespace
}  // namespace svs::nn
