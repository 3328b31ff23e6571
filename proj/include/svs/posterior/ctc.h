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

#ifndef SVS_POSTERIOR_CTC_H_
#define SVS_POSTERIOR_CTC_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "svs/core/types.h"

namespace svs::posterior {

template <typename Scalar>
struct CtcResult {
  Scalar loss;            // -log p(target | log_probs)
  MatrixT<Scalar> grad;   // d loss / d log_probs, zero beyond input_len
};

namespace detail {

template <typename Scalar>
Scalar log_add(Scalar a, Scalar b) {
  constexpr Scalar kNegInf = -std::numeric_limits<Scalar>::infinity();
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const Scalar m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace detail

// Minimum frame count CTC needs for `target`: one frame per label plus one
// separating blank between each pair of equal neighbours.
inline Eigen::Index ctc_min_frames(std::span<const int> target) {
  Eigen::Index n = static_cast<Eigen::Index>(target.size());
  for (size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++n;
  return n;
}

// Log-space forward-backward over the blank-extended label sequence. The
// gradient treats every entry of log_probs as a free variable.
template <typename Derived>
CtcResult<typename Derived::Scalar> ctc_loss(
    const Eigen::MatrixBase<Derived>& log_probs, std::span<const int> target,
    Eigen::Index input_len, Eigen::Index target_len, int blank = 0,
    bool with_grad = true) {
  using Scalar = typename Derived::Scalar;
  constexpr Scalar kNegInf = -std::numeric_limits<Scalar>::infinity();
  require(input_len >= 1 && input_len <= log_probs.rows(),
          "ctc_loss: input length out of range");
  require(target_len >= 0 && target_len <= static_cast<Eigen::Index>(target.size()),
          "ctc_loss: target length out of range");
  const auto labels = target.first(static_cast<size_t>(target_len));
  for (int l : labels)
    require(l != blank && l >= 0 && l < log_probs.cols(),
            "ctc_loss: target contains blank or out-of-range label");
  require(ctc_min_frames(labels) <= input_len, "infeasible target");

  const Eigen::Index frames = input_len;
  const Eigen::Index states = 2 * target_len + 1;
  auto label = [&](Eigen::Index s) {
    return s % 2 == 0 ? blank : labels[static_cast<size_t>(s / 2)];
  };
  auto can_skip = [&](Eigen::Index s) {
    return s >= 2 && label(s) != blank && label(s) != label(s - 2);
  };

  MatrixT<Scalar> alpha = MatrixT<Scalar>::Constant(frames, states, kNegInf);
  alpha(0, 0) = log_probs(0, blank);
  if (states > 1) alpha(0, 1) = log_probs(0, label(1));
  for (Eigen::Index t = 1; t < frames; ++t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      Scalar acc = alpha(t - 1, s);
      if (s >= 1) acc = detail::log_add(acc, alpha(t - 1, s - 1));
      if (can_skip(s)) acc = detail::log_add(acc, alpha(t - 1, s - 2));
      if (acc != kNegInf) alpha(t, s) = acc + log_probs(t, label(s));
    }
  }
  Scalar log_p = alpha(frames - 1, states - 1);
  if (states > 1) log_p = detail::log_add(log_p, alpha(frames - 1, states - 2));

  CtcResult<Scalar> out{-log_p, MatrixT<Scalar>::Zero(log_probs.rows(), log_probs.cols())};
  if (!with_grad || log_p == kNegInf) return out;

  MatrixT<Scalar> beta = MatrixT<Scalar>::Constant(frames, states, kNegInf);
  beta(frames - 1, states - 1) = log_probs(frames - 1, label(states - 1));
  if (states > 1)
    beta(frames - 1, states - 2) = log_probs(frames - 1, label(states - 2));
  for (Eigen::Index t = frames - 2; t >= 0; --t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      Scalar acc = beta(t + 1, s);
      if (s + 1 < states) acc = detail::log_add(acc, beta(t + 1, s + 1));
      if (s + 2 < states && can_skip(s + 2))
        acc = detail::log_add(acc, beta(t + 1, s + 2));
      if (acc != kNegInf) beta(t, s) = acc + log_probs(t, label(s));
    }
  }

  // Occupancy of state s at t is exp(alpha + beta - emission - log_p).
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index s = 0; s < states; ++s) {
      const Scalar a = alpha(t, s), b = beta(t, s);
      if (a == kNegInf || b == kNegInf) continue;
      const int k = label(s);
      out.grad(t, k) -= std::exp(a + b - log_probs(t, k) - log_p);
    }
  }
  return out;
}

// Best-path decode: argmax per frame, merge repeats, drop blanks.
template <typename Derived>
std::vector<int> ctc_greedy_decode(const Eigen::MatrixBase<Derived>& probs,
                                   int blank = 0) {
  std::vector<int> out;
  int previous = -1;
  for (Eigen::Index t = 0; t < probs.rows(); ++t) {
    Eigen::Index best;
    probs.row(t).maxCoeff(&best);
    const int k = static_cast<int>(best);
    if (k != previous && k != blank) out.push_back(k);
    previous = k;
  }
  return out;
}

}  // namespace svs::posterior

#endif  // SVS_POSTERIOR_CTC_H_
