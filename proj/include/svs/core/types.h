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

#ifndef SVS_CORE_TYPES_H_
#define SVS_CORE_TYPES_H_

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace svs {

// Sequence data is laid out time-major: one row per frame (or sample), one
// column per channel.
template <typename Scalar>
using MatrixT =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Model arithmetic runs in single precision; analysis and oracles use double.
using Real = float;
using Matrix = MatrixT<Real>;
using Vector = VectorT<Real>;
using Mask = VectorT<Real>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& message) {
  if (!cond) throw Error(message);
}

}  // namespace svs

#endif  // SVS_CORE_TYPES_H_
