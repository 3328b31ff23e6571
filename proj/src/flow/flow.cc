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

#include "svs/flow/flow.h"

namespace svs::flow {

using nn::Tensor;

namespace {

double masked_sum(const Tensor& logs, const Tensor& mask) {
  return (logs.value().cast<double>().array().colwise() *
          mask.value().cast<double>().col(0).array())
      .sum();
}

}  // namespace

CouplingLayer::CouplingLayer(nn::ParameterStore& store, Rng& rng,
                             const std::string& name, const FlowConfig& config)
    : half_(config.channels / 2), conditioned_(config.cond_channels > 0) {
  require(config.channels % 2 == 0, "flow: channel count must be even");
  pre_ = nn::Linear(store, rng, name + ".pre", half_, config.hidden);
  if (conditioned_)
    cond_proj_ = nn::Linear(store, rng, name + ".cond", config.cond_channels,
                            config.hidden);
  for (int i = 0; i < config.coupling_layers; ++i)
    convs_.emplace_back(store, rng, name + ".conv" + std::to_string(i),
                        config.hidden, config.hidden, config.kernel);
  post_ = nn::Linear(store, rng, name + ".post", config.hidden,
                     2 * (config.channels - half_), nn::Init::kZero);
}

std::pair<Tensor, Tensor> CouplingLayer::transform(const Tensor& x0,
                                                   const Tensor& mask,
                                                   const Tensor& cond) const {
  Tensor h = pre_(x0);
  if (conditioned_ && cond.defined()) h = nn::add(h, cond_proj_(cond));
  h = nn::mul_col(h, mask);
  for (const auto& conv : convs_)
    h = nn::mul_col(nn::add(h, nn::relu(conv(h))), mask);
  Tensor stats = nn::mul_col(post_(h), mask);
  const Eigen::Index rest = stats.cols() / 2;
  return {nn::slice_cols(stats, 0, rest),
          nn::tanh(nn::slice_cols(stats, rest, rest))};
}

FlowResult CouplingLayer::forward(const Tensor& z, const Tensor& mask,
                                  const Tensor& cond) const {
  Tensor x0 = nn::slice_cols(z, 0, half_);
  Tensor x1 = nn::slice_cols(z, half_, z.cols() - half_);
  auto [m, logs] = transform(x0, mask, cond);
  Tensor y1 = nn::mul_col(nn::add(m, nn::mul(x1, nn::exp(logs))), mask);
  FlowResult out;
  out.z = nn::flip_cols(nn::concat_cols({x0, y1}));
  out.logdet = nn::sum(nn::mul_col(logs, mask));
  out.logdet_sum = masked_sum(logs, mask);
  return out;
}

FlowResult CouplingLayer::inverse(const Tensor& y, const Tensor& mask,
                                  const Tensor& cond) const {
  Tensor u = nn::flip_cols(y);
  Tensor x0 = nn::slice_cols(u, 0, half_);
  Tensor y1 = nn::slice_cols(u, half_, u.cols() - half_);
  auto [m, logs] = transform(x0, mask, cond);
  Tensor x1 = nn::mul_col(nn::mul(nn::sub(y1, m), nn::exp(nn::scale(logs, -1))),
                          mask);
  FlowResult out;
  out.z = nn::concat_cols({x0, x1});
  out.logdet = nn::scale(nn::sum(nn::mul_col(logs, mask)), -1);
  out.logdet_sum = -masked_sum(logs, mask);
  return out;
}

FlowStack::FlowStack(nn::ParameterStore& store, Rng& rng,
                     const FlowConfig& config)
    : config_(config) {
  for (int i = 0; i < config.couplings; ++i)
    layers_.emplace_back(store, rng, "flow.coupling" + std::to_string(i), config);
}

void FlowStack::check(const Tensor& x, const Tensor& mask,
                      const Tensor& cond) const {
  require(x.cols() == config_.channels,
          "flow: expected " + std::to_string(config_.channels) +
              " channels, got " + std::to_string(x.cols()));
  require(mask.rows() == x.rows() && mask.cols() == 1,
          "flow: mask does not match frame count");
  if (cond.defined())
    require(cond.rows() == x.rows() && cond.cols() == config_.cond_channels,
            "flow: condition is not frame-aligned");
}

FlowResult FlowStack::forward(const Tensor& z, const Tensor& mask,
                              const Tensor& cond) const {
  check(z, mask, cond);
  FlowResult out{nn::mul_col(z, mask), nn::constant(Matrix::Zero(1, 1))};
  for (const auto& layer : layers_) {
    FlowResult r = layer.forward(out.z, mask, cond);
    out.z = r.z;
    out.logdet = nn::add(out.logdet, r.logdet);
    out.logdet_sum += r.logdet_sum;
  }
  return out;
}

FlowResult FlowStack::inverse(const Tensor& y, const Tensor& mask,
                              const Tensor& cond) const {
  check(y, mask, cond);
  FlowResult out{nn::mul_col(y, mask), nn::constant(Matrix::Zero(1, 1))};
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    FlowResult r = it->inverse(out.z, mask, cond);
    out.z = r.z;
    out.logdet = nn::add(out.logdet, r.logdet);
    out.logdet_sum += r.logdet_sum;
  }
  return out;
}

namespace {

Real valid_frames(const Tensor& mask) {
  const Real n = mask.value().sum();
  require(n > 0, "kl: mask has no valid frames");
  return n;
}

void check_shapes(const posterior::LatentPosterior& q,
                  const prior::PriorDistribution& p, const Tensor& mask) {
  require(q.mean.rows() == p.mean.rows() && q.mean.cols() == p.mean.cols(),
          "kl: posterior and prior shapes differ");
  require(mask.rows() == q.mean.rows(), "kl: mask length mismatch");
}

}  // namespace

Tensor kl_forward(const posterior::LatentPosterior& q,
                  const prior::PriorDistribution& p, const FlowStack& flow,
                  const Tensor& mask, const Tensor& cond) {
  check_shapes(q, p, mask);
  const Real frames = valid_frames(mask);
  FlowResult f = flow.forward(q.z, mask, cond);
  Matrix eps_sq;
  if (q.eps.rows() == q.z.rows() && q.eps.cols() == q.z.cols()) {
    eps_sq = q.eps.array().square().matrix();
  } else {
    const Matrix d = q.z.value() - q.mean.value();
    eps_sq = (d.array().square() * (-q.log_var.value().array()).exp()).matrix();
  }
  Tensor logs_p = nn::scale(p.log_var, 0.5f);
  Tensor logs_q = nn::scale(q.log_var, 0.5f);
  Tensor diff = nn::sub(f.z, p.mean);
  Tensor kl = nn::sub(logs_p, logs_q);
  kl = nn::sub(kl, nn::constant(0.5f * eps_sq));
  kl = nn::add(kl, nn::scale(nn::mul(nn::square(diff),
                                     nn::exp(nn::scale(p.log_var, -1))),
                             0.5f));
  Tensor total = nn::sub(nn::sum(nn::mul_col(kl, mask)), f.logdet);
  return nn::scale(total, 1.0f / frames);
}

Tensor kl_reverse(const posterior::LatentPosterior& q,
                  const prior::PriorDistribution& p, const FlowStack& flow,
                  const Tensor& mask, const Tensor& cond, Rng& rng,
                  double temperature) {
  check_shapes(q, p, mask);
  const Real frames = valid_frames(mask);
  Matrix eps = rng.normal_matrix<Real>(p.mean.rows(), p.mean.cols(), temperature);
  Tensor logs_p = nn::scale(p.log_var, 0.5f);
  Tensor logs_q = nn::scale(q.log_var, 0.5f);
  Tensor y = nn::add(p.mean, nn::mul(nn::exp(logs_p), nn::constant(eps)));
  FlowResult b = flow.inverse(y, mask, cond);
  Tensor diff = nn::sub(b.z, q.mean);
  Tensor kl = nn::sub(logs_q, logs_p);
  kl = nn::sub(kl, nn::constant(0.5f * eps.array().square().matrix()));
  kl = nn::add(kl, nn::scale(nn::mul(nn::square(diff),
                                     nn::exp(nn::scale(q.log_var, -1))),
                             0.5f));
  Tensor total = nn::sub(nn::sum(nn::mul_col(kl, mask)), b.logdet);
  return nn::scale(total, 1.0f / frames);
}

KlTerms bidirectional_kl(const posterior::LatentPosterior& q,
                         const prior::PriorDistribution& p,
                         const FlowStack& flow, const Tensor& mask,
                         const Tensor& cond, Rng& rng, double reverse_weight,
                         double temperature) {
  require(reverse_weight >= 0.0 && reverse_weight <= 1.0,
          "bidirectional_kl: reverse weight must lie in [0, 1], got " +
              std::to_string(reverse_weight));
  KlTerms out;
  out.forward = kl_forward(q, p, flow, mask, cond);
  out.reverse = kl_reverse(q, p, flow, mask, cond, rng, temperature);
  out.total = reverse_weight == 0.0
                  ? out.forward
                  : nn::add(out.forward,
                            nn::scale(out.reverse, static_cast<Real>(reverse_weight)));
  return out;
}

}  // namespace svs::flow
