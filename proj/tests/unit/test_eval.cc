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


#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "svs/core/rng.h"
#include "svs/eval/metrics.h"

namespace svs::eval {
namespace {

using dsp::F0Contour;

F0Contour contour(std::initializer_list<double> hz) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(hz.size()));
  Eigen::Index i = 0;
  for (double x : hz) v(i++) = x;
  return F0Contour::from_hz(v);
}

F0Contour random_contour(Rng& rng, Eigen::Index n, double unvoiced = 0.2) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v(i) = rng.uniform() < unvoiced ? 0.0 : rng.uniform(80.0, 700.0);
  return F0Contour::from_hz(v);
}

TEST(F0Mae, Examples) {
  const auto ref = contour({220, 0, 230, 240, 0});
  EXPECT_EQ(f0_mae(ref, ref), 0.0);
  const auto shifted = contour({225, 0, 235, 245, 0});
  EXPECT_DOUBLE_EQ(f0_mae(shifted, ref), 5.0);
  try {
    f0_mae(contour({0, 100}), contour({100, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("undefined"), std::string::npos);
  }
  EXPECT_THROW(f0_mae(contour({100}), contour({100, 100})), Error);
}

TEST(F0Correlation, Examples) {
  const auto ref = contour({100, 150, 0, 300});
  EXPECT_NEAR(f0_correlation(ref, ref), 1.0, 1e-12);
  EXPECT_NEAR(f0_correlation(contour({1, 2, 3}), contour({3, 2, 1})), -1.0, 1e-12);
  EXPECT_THROW(f0_correlation(contour({5, 5, 5}), contour({1, 2, 3})), Error);
  EXPECT_THROW(f0_correlation(contour({5, 0}), contour({1, 2})), Error);

  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_contour(rng, 50);
    const auto b = random_contour(rng, 50);
    std::vector<double> x, y;
    for (Eigen::Index t = 0; t < 50; ++t)
      if (a.voiced[t] && b.voiced[t]) {
        x.push_back(a.hz(t));
        y.push_back(b.hz(t));
      }
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
    double cov = 0, vx = 0, vy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
      cov += (x[i] - mx) * (y[i] - my);
      vx += (x[i] - mx) * (x[i] - mx);
      vy += (y[i] - my) * (y[i] - my);
    }
    EXPECT_NEAR(f0_correlation(a, b), cov / std::sqrt(vx * vy), 1e-10);
  }
}

TEST(DurationMae, Examples) {
  const std::vector<double> ref = {3, 7, 12};
  EXPECT_EQ(duration_mae(ref, ref), 0.0);
  const std::vector<double> plus2 = {5, 9, 14};
  EXPECT_DOUBLE_EQ(duration_mae(plus2, ref), 2.0);
  const std::vector<double> a = {3, 7}, b = {5, 5};
  EXPECT_DOUBLE_EQ(duration_mae(a, b), 2.0);
  EXPECT_THROW(duration_mae(a, ref), Error);
}

TEST(Metrics, TriangleInequalityAndRanges) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    // fully voiced contours keep the mutual-voicing set fixed
    const auto a = random_contour(rng, 30, 0.0);
    const auto b = random_contour(rng, 30, 0.0);
    const auto c = random_contour(rng, 30, 0.0);
    EXPECT_LE(f0_mae(a, c), f0_mae(a, b) + f0_mae(b, c) + 1e-9);
    EXPECT_GE(f0_mae(a, b), 0.0);
    const double r = f0_correlation(a, b);
    EXPECT_GE(r, -1.0);
    EXPECT_LE(r, 1.0);
    std::vector<double> x(8), y(8), z(8);
    for (int i = 0; i < 8; ++i) x[i] = rng.uniform(1, 30), y[i] = rng.uniform(1, 30), z[i] = rng.uniform(1, 30);
    EXPECT_LE(duration_mae(x, z), duration_mae(x, y) + duration_mae(y, z) + 1e-9);
  }
}

class StubEmbedder : public SpeakerEmbedder {
 public:
  Eigen::VectorXd embed(const dsp::AudioClip& audio) const override {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(4);
    v(audio.samples(0) > 0 ? 0 : 1) = 1.0;
    return v;
  }
  std::string name() const override { return "stub"; }
};

dsp::AudioClip clip(double first) {
  dsp::AudioClip c;
  c.samples = Eigen::VectorXd::Constant(4800, 0.1);
  c.samples(0) = first;
  return c;
}

TEST(SpeakerSimilarity, Examples) {
  StubEmbedder stub;
  EXPECT_NEAR(speaker_similarity(clip(0.5), clip(0.5), stub), 1.0, 1e-6);
  EXPECT_NEAR(speaker_similarity(clip(0.5), clip(-0.5), stub), 0.0, 1e-12);
  EXPECT_THROW(cosine_similarity(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3)), Error);

  nn::ParameterStore store;
  Rng rng(3);
  prior::SpeakerEncoder encoder(store, rng, {});
  EncoderEmbedder embedder(encoder, dsp::FeatureConfig{});
  for (int trial = 0; trial < 3; ++trial) {
    dsp::AudioClip a, b;
    a.samples = rng.normal_matrix<double>(12000, 1, 0.1).col(0);
    b.samples = rng.normal_matrix<double>(12000, 1, 0.1).col(0);
    EXPECT_NEAR(speaker_similarity(a, b, embedder), speaker_similarity(b, a, embedder), 1e-10);
    EXPECT_NEAR(speaker_similarity(a, a, embedder), 1.0, 1e-6);
  }
}

EvalUtterance utt(const std::string& id, std::initializer_list<double> ref,
                  std::initializer_list<double> pred) {
  EvalUtterance u;
  u.utt_id = id;
  u.ref_f0 = contour(ref);
  u.pred_f0 = contour(pred);
  u.ref_durations = {4, 6};
  u.pred_durations = {5, 6};
  return u;
}

TEST(RangeSubset, ThresholdsAndSelection) {
  EXPECT_NEAR(kRangeLowHz, 174.614, 1e-3);
  EXPECT_NEAR(kRangeHighHz, 587.330, 1e-3);
  EXPECT_DOUBLE_EQ(kRangeLowHz, dsp::midi_to_hz<double>(53));
  EXPECT_DOUBLE_EQ(kRangeHighHz, dsp::midi_to_hz<double>(74));
  const std::vector<EvalUtterance> all = {utt("in", {200, 300, 500}, {210, 290, 505}),
                                          utt("low", {150, 300, 0}, {160, 300, 0}),
                                          utt("high", {600, 0, 400}, {590, 0, 410})};
  const auto subset = range_restricted_subset(all);
  ASSERT_EQ(subset.size(), 2u);
  EXPECT_EQ(subset[0].utt_id, "low");
  EXPECT_EQ(subset[1].utt_id, "high");
  EXPECT_THROW(range_restricted_subset({}), Error);

  const double inf = std::numeric_limits<double>::infinity();
  const auto none = range_restricted_subset(all, -inf, inf);
  EXPECT_TRUE(none.empty());
  const auto everything = range_restricted_subset(all, inf, -inf);
  ASSERT_EQ(everything.size(), all.size());
  const auto full = compute_report(all);
  const auto same = compute_report(everything);
  EXPECT_EQ(*full.f0_mae, *same.f0_mae);
  EXPECT_EQ(*full.f0_corr, *same.f0_corr);
  EXPECT_EQ(*full.duration_mae, *same.duration_mae);
}

TEST(Report, PoolsFramesAndWritesArtifacts) {
  const std::vector<EvalUtterance> all = {utt("a", {200, 300}, {210, 300}),
                                          utt("b", {100, 0, 120}, {100, 0, 150})};
  const auto r = compute_report(all);
  EXPECT_EQ(r.utterances, 2u);
  EXPECT_NEAR(*r.f0_mae, (10.0 + 0.0 + 0.0 + 30.0) / 4, 1e-12);
  EXPECT_NEAR(*r.duration_mae, 0.5, 1e-12);
  EXPECT_FALSE(r.speaker_sim.has_value());
  const auto line = report_line(r);
  EXPECT_NE(line.find("\"f0_mae_hz\""), std::string::npos);
  EXPECT_EQ(line.find('\n'), std::string::npos);

  const auto path = std::filesystem::temp_directory_path() / "svs_pitch.svg";
  write_pitch_plot(path, all[0].ref_f0, all[0].pred_f0, 256.0 / 24000, "a");
  std::ifstream in(path);
  std::string head;
  std::getline(in, head);
  EXPECT_NE(head.find("<svg"), std::string::npos);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace svs::eval
