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


#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "svs/core/rng.h"
#include "svs/flow/flow.h"
#include "svs/nn/ops.h"

namespace svs::flow {
namespace {

using nn::Tensor;

FlowConfig small_config(int channels = 8, int cond = 6) {
  FlowConfig c;
  c.channels = channels;
  c.hidden = 16;
  c.kernel = 3;
  c.couplings = 4;
  c.cond_channels = cond;
  return c;
}

// Replaces the zero-initialized output layers so the stack is not the identity.
void randomize(FlowStack& flow, uint64_t seed) {
  Rng rng(seed);
  for (auto& layer : flow.layers()) {
    Matrix& w = layer.post().weight.mutable_value();
    w = rng.normal_matrix<Real>(w.rows(), w.cols(), 0.2);
    Matrix& b = layer.post().bias.mutable_value();
    b = rng.normal_matrix<Real>(b.rows(), b.cols(), 0.2);
  }
}

struct FlowFixture {
  nn::ParameterStore store;
  FlowStack flow;
  explicit FlowFixture(FlowConfig config = small_config()) {
    Rng rng(1);
    flow = FlowStack(store, rng, config);
  }
};

TEST(Flow, IdentityAtInit) {
  FlowFixture f;
  Rng rng(2);
  Matrix z = rng.normal_matrix<Real>(10, 8);
  Tensor cond = nn::constant(rng.normal_matrix<Real>(10, 6));
  auto fw = f.flow.forward(nn::constant(z), nn::ones_mask(10), cond);
  EXPECT_LT((fw.z.value() - z).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(fw.logdet.item(), 0.0, 1e-6);
  auto inv = f.flow.inverse(nn::constant(z), nn::ones_mask(10), cond);
  EXPECT_LT((inv.z.value() - z).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Flow, InvertibleWithExactLogdet) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    FlowFixture f;
    randomize(f.flow, 10 + seed);
    Rng rng(seed);
    Matrix z = rng.normal_matrix<Real>(12, 8);
    Tensor cond = nn::constant(rng.normal_matrix<Real>(12, 6));
    Tensor mask = nn::ones_mask(12);
    auto fw = f.flow.forward(nn::constant(z), mask, cond);
    EXPECT_GT(std::abs(fw.logdet.item()), 1e-3);
    auto back = f.flow.inverse(fw.z, mask, cond);
    EXPECT_LT((back.z.value() - z).cwiseAbs().maxCoeff(), 1e-4);
    EXPECT_NEAR(fw.logdet.item() + back.logdet.item(), 0.0, 1e-4);
    auto inv = f.flow.inverse(nn::constant(z), mask, cond);
    auto again = f.flow.forward(inv.z, mask, cond);
    EXPECT_LT((again.z.value() - z).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(Flow, LogdetMatchesNumericJacobian) {
  FlowFixture f(small_config(4, 0));
  randomize(f.flow, 3);
  Rng rng(4);
  MatrixT<double> z = rng.normal_matrix<double>(1, 4);
  auto run = [&](const MatrixT<double>& x) {
    return f.flow.forward(nn::constant(x.cast<Real>()), nn::ones_mask(1)).z.value().cast<double>().eval();
  };
  MatrixT<double> jac(4, 4);
  const double h = 1e-3;
  for (int j = 0; j < 4; ++j) {
    MatrixT<double> up = z, down = z;
    up(0, j) += h;
    down(0, j) -= h;
    jac.col(j) = ((run(up) - run(down)) / (2 * h)).transpose();
  }
  const double numeric = std::log(std::abs(jac.determinant()));
  const double analytic = f.flow.forward(nn::constant(z.cast<Real>()), nn::ones_mask(1)).logdet.item();
  EXPECT_NEAR(analytic, numeric, 1e-2);
}

TEST(Flow, ItemsAreIndependentOfPadding) {
  FlowFixture f;
  randomize(f.flow, 5);
  Rng rng(6);
  Matrix a = rng.normal_matrix<Real>(7, 8);
  Matrix ca = rng.normal_matrix<Real>(7, 6);
  auto alone = f.flow.forward(nn::constant(a), nn::ones_mask(7), nn::constant(ca));
  Matrix padded = Matrix::Zero(11, 8), cpad = Matrix::Zero(11, 6), mask = Matrix::Zero(11, 1);
  padded.topRows(7) = a;
  padded.bottomRows(4) = rng.normal_matrix<Real>(4, 8);
  cpad.topRows(7) = ca;
  mask.topRows(7).setOnes();
  auto batched = f.flow.forward(nn::constant(padded), nn::constant(mask), nn::constant(cpad));
  EXPECT_LT((batched.z.value().topRows(7) - alone.z.value()).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_EQ(batched.z.value().bottomRows(4).cwiseAbs().maxCoeff(), 0.0f);
  EXPECT_NEAR(batched.logdet.item(), alone.logdet.item(), 1e-4);
}

TEST(Flow, ShapeErrors) {
  FlowFixture f;
  EXPECT_THROW(f.flow.forward(nn::constant(Matrix::Ones(5, 7)), nn::ones_mask(5),
                              nn::constant(Matrix::Ones(5, 6))),
               Error);
  EXPECT_THROW(f.flow.forward(nn::constant(Matrix::Ones(5, 8)), nn::ones_mask(4),
                              nn::constant(Matrix::Ones(5, 6))),
               Error);
  EXPECT_THROW(f.flow.inverse(nn::constant(Matrix::Ones(5, 8)), nn::ones_mask(5),
                              nn::constant(Matrix::Ones(3, 6))),
               Error);
}

posterior::LatentPosterior gaussian_posterior(Eigen::Index t, Eigen::Index c, Real mean,
                                              Rng& rng) {
  posterior::LatentPosterior q;
  q.mean = nn::constant(Matrix::Constant(t, c, mean));
  q.log_var = nn::constant(Matrix::Zero(t, c));
  q.eps = rng.normal_matrix<Real>(t, c);
  q.z = nn::constant(q.eps.array() + mean);
  return q;
}

prior::PriorDistribution gaussian_prior(Eigen::Index t, Eigen::Index c, Real mean) {
  return {nn::constant(Matrix::Constant(t, c, mean)), nn::constant(Matrix::Zero(t, c))};
}

TEST(Kl, IdenticalDistributionsGiveZeroOnAverage) {
  FlowFixture f(small_config(2, 0));
  Rng rng(7);
  const Eigen::Index n = 10000;
  auto q = gaussian_posterior(n, 2, 0.0f, rng);
  auto p = gaussian_prior(n, 2, 0.0f);
  auto kl = bidirectional_kl(q, p, f.flow, nn::ones_mask(n), {}, rng);
  EXPECT_TRUE(std::isfinite(kl.total.item()));
  EXPECT_GE(kl.forward.item(), -1e-6);
  EXPECT_NEAR(kl.forward.item(), 0.0, 1e-6);
  EXPECT_NEAR(kl.reverse.item(), 0.0, 1e-6);
}

TEST(Kl, ClosedFormGaussian) {
  // KL(N(0,1) || N(1,1)) = 0.5 per dimension, in both directions.
  FlowFixture f(small_config(2, 0));
  Rng rng(8);
  const Eigen::Index n = 10000;
  auto q = gaussian_posterior(n, 2, 0.0f, rng);
  auto p = gaussian_prior(n, 2, 1.0f);
  auto kl = bidirectional_kl(q, p, f.flow, nn::ones_mask(n), {}, rng, 1.0);
  const double exact = 0.5 * 2;
  EXPECT_NEAR(kl.forward.item(), exact, 0.05 * exact);
  EXPECT_NEAR(kl.reverse.item(), exact, 0.05 * exact);
  EXPECT_NEAR(kl.total.item(), kl.forward.item() + kl.reverse.item(), 1e-4);
}

TEST(Kl, WeightHandling) {
  FlowFixture f;
  randomize(f.flow, 9);
  Rng rng(10);
  auto q = gaussian_posterior(20, 8, 0.3f, rng);
  auto p = gaussian_prior(20, 8, -0.2f);
  Tensor cond = nn::constant(rng.normal_matrix<Real>(20, 6));
  Tensor mask = nn::ones_mask(20);
  Rng r1(3), r2(3);
  auto w0 = bidirectional_kl(q, p, f.flow, mask, cond, r1, 0.0);
  EXPECT_EQ(w0.total.item(), kl_forward(q, p, f.flow, mask, cond).item());
  auto w5 = bidirectional_kl(q, p, f.flow, mask, cond, r2);
  EXPECT_NEAR(w5.total.item(), w5.forward.item() + 0.5 * w5.reverse.item(), 1e-4);
  EXPECT_THROW(bidirectional_kl(q, p, f.flow, mask, cond, rng, -0.1), Error);
  EXPECT_THROW(bidirectional_kl(q, p, f.flow, mask, cond, rng, 1.5), Error);
}

TEST(Kl, MaskedFramesIgnoredAndBatchMeanPermutationInvariant) {
  FlowFixture f;
  randomize(f.flow, 11);
  Rng rng(12);
  std::vector<double> losses;
  for (int item = 0; item < 4; ++item) {
    auto q = gaussian_posterior(9, 8, 0.1f * item, rng);
    auto p = gaussian_prior(9, 8, 0.0f);
    Tensor cond = nn::constant(rng.normal_matrix<Real>(9, 6));
    losses.push_back(kl_forward(q, p, f.flow, nn::ones_mask(9), cond).item());
  }
  double forward = 0.0;
  for (double l : losses) forward += l;
  std::reverse(losses.begin(), losses.end());
  std::swap(losses[0], losses[2]);
  double shuffled = 0.0;
  for (double l : losses) shuffled += l;
  EXPECT_NEAR(forward / 4, shuffled / 4, 1e-6);

  auto q = gaussian_posterior(9, 8, 0.0f, rng);
  auto p = gaussian_prior(9, 8, 0.5f);
  Matrix mask = Matrix::Ones(9, 1);
  mask.bottomRows(3).setZero();
  Tensor cond = nn::constant(rng.normal_matrix<Real>(9, 6));
  const double base = kl_forward(q, p, f.flow, nn::constant(mask), cond).item();
  Matrix pm = p.mean.value();
  pm.bottomRows(3).setConstant(40.0f);
  prior::PriorDistribution p2{nn::constant(pm), p.log_var};
  EXPECT_NEAR(kl_forward(q, p2, f.flow, nn::constant(mask), cond).item(), base, 1e-5);
}

}  // namespace
}  // namespace svs::flow
