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
#include "svs/nn/ops.h"
#include "svs/nn/optim.h"
#include "svs/prior/prior.h"
#include "svs/prior/speaker_encoder.h"
#include "svs/prior/upsampler.h"
#include "svs/score/lexicon.h"

namespace svs::prior {
namespace {

using nn::Tensor;

Tensor column(const std::vector<double>& v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  for (size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = static_cast<Real>(v[i]);
  return nn::constant(m);
}

TEST(Upsampler, ShapesAndRowSums) {
  Rng rng(1);
  auto r = differentiable_upsample(nn::constant(rng.normal_matrix<Real>(2, 2)),
                                   column({2, 3}), 5);
  EXPECT_EQ(r.projection.rows(), 5);
  EXPECT_EQ(r.projection.cols(), 2);
  EXPECT_EQ(r.frame_hidden.rows(), 5);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index p = 1 + rng.uniform_int(0, 6);
    Eigen::VectorXd d(p);
    for (Eigen::Index i = 0; i < p; ++i) d(i) = rng.uniform(0.2, 8.0);
    const Eigen::Index t = std::max<Eigen::Index>(1, std::lround(d.sum()));
    const auto w = soft_projection<double>(d, t, 1.0);
    EXPECT_GE(w.minCoeff(), 0.0);
    for (Eigen::Index row = 0; row < t; ++row) EXPECT_NEAR(w.row(row).sum(), 1.0, 1e-5);
  }
}

TEST(Upsampler, SinglePhonemeReplicates) {
  Rng rng(2);
  Matrix h = rng.normal_matrix<Real>(1, 6);
  auto r = differentiable_upsample(nn::constant(h), column({7}), 7);
  for (Eigen::Index t = 0; t < 7; ++t)
    EXPECT_LT((r.frame_hidden.value().row(t) - h.row(0)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Upsampler, DurationGradientMatchesFiniteDifference) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd d(3);
    for (int i = 0; i < 3; ++i) d(i) = rng.uniform(1.0, 4.0);
    const MatrixT<double> hidden = rng.normal_matrix<double>(3, 4);
    const MatrixT<double> probe = rng.normal_matrix<double>(8, 4);
    auto loss = [&](const Eigen::VectorXd& dd) {
      return (soft_projection<double>(dd, 8, 1.0) * hidden).cwiseProduct(probe).sum();
    };
    const auto w = soft_projection<double>(d, 8, 1.0);
    const MatrixT<double> grad_w = probe * hidden.transpose();
    const Eigen::VectorXd analytic = soft_projection_vjp<double>(d, w, grad_w, 1.0);
    const double h = 1e-3;
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd up = d, down = d;
      up(i) += h;
      down(i) -= h;
      const double fd = (loss(up) - loss(down)) / (2 * h);
      EXPECT_LE(std::abs(fd - analytic(i)), 1e-3 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Upsampler, TensorPathMatchesDoubleKernel) {
  Rng rng(4);
  Tensor d(Matrix((Matrix(3, 1) << 2.3f, 1.4f, 3.1f).finished()), true);
  Tensor hidden(rng.normal_matrix<Real>(3, 5), true);
  Matrix probe = rng.normal_matrix<Real>(7, 5);
  auto r = differentiable_upsample(hidden, d, 7);
  nn::backward(nn::sum(nn::mul(r.frame_hidden, nn::constant(probe))));
  const Eigen::VectorXd dd = d.value().col(0).cast<double>();
  const auto w = soft_projection<double>(dd, 7, 1.0);
  const MatrixT<double> gw = probe.cast<double>() * hidden.value().cast<double>().transpose();
  const Eigen::VectorXd ref = soft_projection_vjp<double>(dd, w, gw, 1.0);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(d.grad()(i, 0), ref(i), 1e-4);
  EXPECT_GT(d.grad().cwiseAbs().maxCoeff(), 0.0f);
}

TEST(Upsampler, ConvergesToHardAssignment) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> dur;
    Eigen::VectorXd d(1 + rng.uniform_int(0, 5));
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      dur.push_back(static_cast<int>(rng.uniform_int(1, 6)));
      d(i) = dur.back();
    }
    std::vector<int> oracle;
    for (size_t i = 0; i < dur.size(); ++i)
      for (int k = 0; k < dur[i]; ++k) oracle.push_back(static_cast<int>(i));
    EXPECT_EQ(hard_assignment(dur), oracle);
    const auto w = soft_projection<double>(d, static_cast<Eigen::Index>(oracle.size()), 0.01);
    for (Eigen::Index t = 0; t < w.rows(); ++t) {
      Eigen::Index best;
      w.row(t).maxCoeff(&best);
      EXPECT_EQ(best, oracle[static_cast<size_t>(t)]);
      EXPECT_GT(w(t, best), 0.99);
    }
  }
}

TEST(Upsampler, Errors) {
  EXPECT_THROW(differentiable_upsample(nn::constant(Matrix::Ones(2, 3)), column({1, 2}), 0),
               Error);
  EXPECT_THROW(differentiable_upsample(nn::constant(Matrix::Ones(2, 3)), column({1, -2}), 3),
               Error);
  EXPECT_THROW(differentiable_upsample(nn::constant(Matrix::Ones(3, 3)), column({1, 2}), 3),
               Error);
}

TEST(GroupSoftmax, NormalizesWithinNotes) {
  Rng rng(6);
  const std::vector<int> notes = {0, 0, 1, 2, 2, 2};
  for (int trial = 0; trial < 50; ++trial) {
    Matrix logits = rng.normal_matrix<Real>(6, 1, 3.0);
    Matrix r = group_softmax(nn::constant(logits), notes).value();
    EXPECT_NEAR(r(0, 0) + r(1, 0), 1.0, 1e-5);
    EXPECT_NEAR(r(2, 0), 1.0, 1e-6);
    EXPECT_NEAR(r(3, 0) + r(4, 0) + r(5, 0), 1.0, 1e-5);
    EXPECT_GT(r.minCoeff(), 0.0f);
  }
}

struct PriorFixture {
  nn::ParameterStore store;
  PriorEncoder prior;
  PriorConfig config;
  PriorFixture() {
    Rng rng(7);
    config.note_layers = 2;
    prior = PriorEncoder(store, rng, config);
  }
};

SpeakerEmbedding speaker(Real value) {
  return {nn::constant(Matrix::Constant(1, kSpeakerDim, value)), {}};
}

score::MusicalScore seven_phonemes() {
  return score::parse_annotation(
      "s|m a l i AP sh ang|60 60 62 62 0 64 64|0.1 0.2 0.1 0.3 0.1 0.05 0.4",
      score::PhonemeLexicon::standard());
}

TEST(Prior, EncodeScoreShapeAndConditioning) {
  PriorFixture f;
  const auto s = seven_phonemes();
  Matrix a = f.prior.encode_score(s, speaker(0.0f)).value();
  Matrix b = f.prior.encode_score(s, speaker(0.5f)).value();
  EXPECT_EQ(a.rows(), 7);
  EXPECT_EQ(a.cols(), 192);
  EXPECT_GT((a - b).norm(), 0.0f);
  EXPECT_EQ(f.prior.phoneme_table().cols(), 192);
  EXPECT_EQ(f.prior.phoneme_table().rows(), 62);
  const std::vector<int> ids = {0, 60, 127};
  EXPECT_EQ(f.prior.pitch_embedding(ids).cols(), 192);
  EXPECT_THROW(f.prior.encode_frames(nn::constant(Matrix::Ones(5, 100)), nn::ones_mask(5),
                                     speaker(0.1f)),
               Error);
}

TEST(Prior, PredictDurationNormalization) {
  PriorFixture f;
  Rng rng(8);
  Tensor hidden = nn::constant(rng.normal_matrix<Real>(5, 192));
  const std::vector<int> notes = {0, 1, 1, 2, 2};
  const std::vector<int> lengths = {12, 10, 10, 7, 7};
  auto d = f.prior.predict_duration(hidden, lengths, notes);
  EXPECT_NEAR(d.durations_frames.value()(0, 0), 12.0, 1e-5);
  EXPECT_NEAR(d.ratios.value()(0, 0), 1.0, 1e-6);
  EXPECT_NEAR(d.durations_frames.value()(1, 0) + d.durations_frames.value()(2, 0), 10.0, 1e-4);
  EXPECT_NEAR(d.durations_frames.value()(3, 0) + d.durations_frames.value()(4, 0), 7.0, 1e-4);
  const std::vector<int> one_note = {0, 0};
  Matrix even = group_softmax(nn::constant(Matrix::Constant(2, 1, 0.7f)), one_note).value() * 10.0f;
  EXPECT_NEAR(even(0, 0), 5.0, 1e-5);
  EXPECT_NEAR(even(1, 0), 5.0, 1e-5);
  const std::vector<int> bad = {12, 0, 0, 7, 7};
  try {
    f.prior.predict_duration(hidden, bad, notes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("non-positive note duration"), std::string::npos);
  }
}

TEST(Prior, FrameVarianceShapesAndZeroInit) {
  PriorFixture f;
  auto v = f.prior.predict_frame_variance(nn::constant(Matrix::Zero(12, 192)));
  EXPECT_EQ(v.log_f0.rows(), 12);
  EXPECT_EQ(v.energy.rows(), 12);
  EXPECT_EQ(v.embedding.rows(), 12);
  EXPECT_EQ(v.embedding.cols(), 192);
  EXPECT_EQ(v.log_f0.value().cwiseAbs().maxCoeff(), 0.0f);
  EXPECT_EQ(v.energy.value().cwiseAbs().maxCoeff(), 0.0f);
  EXPECT_EQ(v.voiced_logit.value().cwiseAbs().maxCoeff(), 0.0f);
}

TEST(Prior, PitchPredictorOverfits) {
  PriorFixture f;
  Rng rng(9);
  Tensor hidden = nn::constant(rng.normal_matrix<Real>(24, 192));
  Matrix target(24, 1);
  for (Eigen::Index t = 0; t < 24; ++t) target(t, 0) = static_cast<Real>(5.3 + 0.3 * std::sin(0.4 * t));
  nn::AdamW opt(f.store.tensors_in_groups({"pitch_predictor"}), {});
  double l1 = 0.0;
  for (int step = 0; step < 300; ++step) {
    opt.zero_grad();
    auto v = f.prior.predict_frame_variance(hidden, nn::constant(Matrix::Constant(24, 1, kLogF0Center)));
    Tensor loss = nn::mean(nn::abs(nn::sub(v.log_f0, nn::constant(target))));
    nn::backward(loss);
    opt.step(2e-3);
    l1 = loss.item();
  }
  EXPECT_LT(l1, 0.05);
}

TEST(Prior, FramePriorShapesMaskingAndRange) {
  PriorFixture f;
  Rng rng(10);
  Matrix h = rng.uniform_matrix<Real>(9, 192, -10, 10);
  Matrix mask = Matrix::Ones(9, 1);
  mask.bottomRows(2).setZero();
  auto a = f.prior.frame_prior(nn::constant(h), nn::constant(mask));
  EXPECT_EQ(a.mean.rows(), 9);
  EXPECT_EQ(a.log_var.cols(), 192);
  EXPECT_TRUE(a.mean.value().allFinite());
  EXPECT_TRUE(a.log_var.value().allFinite());
  Matrix perturbed = h;
  perturbed.bottomRows(2) = rng.uniform_matrix<Real>(2, 192, -10, 10);
  auto b = f.prior.frame_prior(nn::constant(perturbed), nn::constant(mask));
  EXPECT_TRUE(a.mean.value() == b.mean.value());
  EXPECT_TRUE(a.log_var.value() == b.log_var.value());
}

TEST(Prior, NoteLogF0) {
  const auto s = seven_phonemes();
  Matrix lf = note_log_f0(s);
  EXPECT_NEAR(lf(0, 0), std::log(261.6256), 1e-4);
  EXPECT_TRUE(lf.allFinite());
}

struct SpeakerFixture {
  nn::ParameterStore store;
  SpeakerEncoder encoder;
  SpeakerFixture() {
    Rng rng(11);
    encoder = SpeakerEncoder(store, rng, {});
  }
};

TEST(SpeakerEncoder, ShapesDeterminismAndErrors) {
  SpeakerFixture f;
  Rng rng(12);
  for (Eigen::Index t : {8, 20, 57}) {
    Matrix mel = rng.normal_matrix<Real>(t, 80);
    auto a = f.encoder.speaker_encode(nn::constant(mel));
    auto b = f.encoder.speaker_encode(nn::constant(mel));
    EXPECT_EQ(a.vec.rows(), 1);
    EXPECT_EQ(a.vec.cols(), 192);
    EXPECT_EQ(a.frame_vecs.rows(), t);
    EXPECT_EQ(a.frame_vecs.cols(), 192);
    EXPECT_TRUE(a.vec.value() == b.vec.value());
    EXPECT_TRUE(a.vec.value().allFinite());
  }
  EXPECT_THROW(f.encoder.speaker_encode(nn::constant(Matrix::Ones(3, 80))), Error);
  EXPECT_THROW(f.encoder.speaker_encode(nn::constant(Matrix::Ones(30, 40))), Error);
}

TEST(SpeakerEncoder, AverageEmbedding) {
  SpeakerFixture f;
  Rng rng(13);
  std::vector<Matrix> mels = {rng.normal_matrix<Real>(20, 80), rng.normal_matrix<Real>(31, 80),
                              rng.normal_matrix<Real>(15, 80)};
  auto pooled = [&](const Matrix& m) { return f.encoder.speaker_encode(nn::constant(m)).vec.value(); };
  auto one = average_speaker_embedding(f.encoder, {mels[0]});
  EXPECT_LT((one.vec.value() - pooled(mels[0])).cwiseAbs().maxCoeff(), 1e-6);
  auto two = average_speaker_embedding(f.encoder, {mels[0], mels[1]});
  Matrix oracle = (pooled(mels[0]) + pooled(mels[1])) / 2.0f;
  EXPECT_LT((two.vec.value() - oracle).cwiseAbs().maxCoeff(), 1e-6);
  auto fwd = average_speaker_embedding(f.encoder, mels);
  auto rev = average_speaker_embedding(f.encoder, {mels[2], mels[0], mels[1]});
  EXPECT_LT((fwd.vec.value() - rev.vec.value()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_FALSE(fwd.vec.requires_grad());
  EXPECT_THROW(average_speaker_embedding(f.encoder, {}), Error);
}

}  // namespace
}  // namespace svs::prior
