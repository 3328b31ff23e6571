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

#include "svs/nn/ops.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace svs::nn {

namespace {

Node& input(Node& n, size_t i) { return *n.inputs[i]; }
bool wants(Node& n, size_t i) { return n.inputs[i]->requires_grad; }

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          std::string(op) + ": shape mismatch [" + std::to_string(a.rows()) +
              "x" + std::to_string(a.cols()) + "] vs [" +
              std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + "]");
}

template <typename F, typename DF>
Tensor unary(const Tensor& a, F f, DF df) {
  Matrix out = a.value().unaryExpr(f);
  return Tensor::from_op(std::move(out), {a}, [df](Node& n) {
    Node& x = input(n, 0);
    x.accumulate(n.grad.cwiseProduct(
        x.value.binaryExpr(n.value, df)));
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  return Tensor::from_op(a.value() + b.value(), {a, b}, [](Node& n) {
    input(n, 0).accumulate(n.grad);
    input(n, 1).accumulate(n.grad);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  return Tensor::from_op(a.value() - b.value(), {a, b}, [](Node& n) {
    input(n, 0).accumulate(n.grad);
    input(n, 1).accumulate(-n.grad);
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  return Tensor::from_op(a.value().cwiseProduct(b.value()), {a, b},
                         [](Node& n) {
                           Node& x = input(n, 0);
                           Node& y = input(n, 1);
                           if (x.requires_grad)
                             x.accumulate(n.grad.cwiseProduct(y.value));
                           if (y.requires_grad)
                             y.accumulate(n.grad.cwiseProduct(x.value));
                         });
}

Tensor div(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "div");
  return Tensor::from_op(
      a.value().cwiseQuotient(b.value()), {a, b}, [](Node& n) {
        Node& x = input(n, 0);
        Node& y = input(n, 1);
        if (x.requires_grad) x.accumulate(n.grad.cwiseQuotient(y.value));
        if (y.requires_grad)
          y.accumulate(-n.grad.cwiseProduct(n.value).cwiseQuotient(y.value));
      });
}

Tensor scale(const Tensor& a, Real s) {
  return Tensor::from_op(a.value() * s, {a},
                         [s](Node& n) { input(n, 0).accumulate(n.grad * s); });
}

Tensor add_scalar(const Tensor& a, Real s) {
  return Tensor::from_op(a.value().array() + s, {a},
                         [](Node& n) { input(n, 0).accumulate(n.grad); });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.rows(),
          "matmul: inner dimension mismatch " + std::to_string(a.cols()) +
              " vs " + std::to_string(b.rows()));
  Matrix out;
  out.noalias() = a.value() * b.value();
  return Tensor::from_op(std::move(out), {a, b}, [](Node& n) {
    Node& x = input(n, 0);
    Node& y = input(n, 1);
    if (x.requires_grad) {
      Matrix g;
      g.noalias() = n.grad * y.value.transpose();
      x.accumulate(g);
    }
    if (y.requires_grad) {
      Matrix g;
      g.noalias() = x.value.transpose() * n.grad;
      y.accumulate(g);
    }
  });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  require(row.rows() == 1 && row.cols() == a.cols(), "add_row: shape mismatch");
  Matrix out = a.value().rowwise() + row.value().row(0);
  return Tensor::from_op(std::move(out), {a, row}, [](Node& n) {
    input(n, 0).accumulate(n.grad);
    if (wants(n, 1)) input(n, 1).accumulate(n.grad.colwise().sum());
  });
}

Tensor mul_row(const Tensor& a, const Tensor& row) {
  require(row.rows() == 1 && row.cols() == a.cols(), "mul_row: shape mismatch");
  Matrix out = a.value().array().rowwise() * row.value().row(0).array();
  return Tensor::from_op(std::move(out), {a, row}, [](Node& n) {
    Node& x = input(n, 0);
    Node& r = input(n, 1);
    if (x.requires_grad)
      x.accumulate(
          Matrix(n.grad.array().rowwise() * r.value.row(0).array()));
    if (r.requires_grad)
      r.accumulate(n.grad.cwiseProduct(x.value).colwise().sum());
  });
}

Tensor add_col(const Tensor& a, const Tensor& col) {
  require(col.cols() == 1 && col.rows() == a.rows(), "add_col: shape mismatch");
  Matrix out = a.value().colwise() + col.value().col(0);
  return Tensor::from_op(std::move(out), {a, col}, [](Node& n) {
    input(n, 0).accumulate(n.grad);
    if (wants(n, 1)) input(n, 1).accumulate(n.grad.rowwise().sum());
  });
}

Tensor mul_col(const Tensor& a, const Tensor& col) {
  require(col.cols() == 1 && col.rows() == a.rows(), "mul_col: shape mismatch");
  Matrix out = a.value().array().colwise() * col.value().col(0).array();
  return Tensor::from_op(std::move(out), {a, col}, [](Node& n) {
    Node& x = input(n, 0);
    Node& c = input(n, 1);
    if (x.requires_grad)
      x.accumulate(
          Matrix(n.grad.array().colwise() * c.value.col(0).array()));
    if (c.requires_grad)
      c.accumulate(n.grad.cwiseProduct(x.value).rowwise().sum());
  });
}

Tensor broadcast_rows(const Tensor& row, Eigen::Index rows) {
  require(row.rows() == 1, "broadcast_rows: expected a single row");
  Matrix out = row.value().replicate(rows, 1);
  return Tensor::from_op(std::move(out), {row}, [](Node& n) {
    input(n, 0).accumulate(n.grad.colwise().sum());
  });
}

Tensor exp(const Tensor& a) {
  return unary(
      a, [](Real x) { return std::exp(x); },
      [](Real, Real y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary(
      a, [](Real x) { return std::log(x); },
      [](Real x, Real) { return Real(1) / x; });
}

Tensor log_clamped(const Tensor& a, Real floor) {
  return unary(
      a, [floor](Real x) { return std::log(std::max(x, floor)); },
      [floor](Real x, Real) { return x > floor ? Real(1) / x : Real(0); });
}

Tensor sqrt_clamped(const Tensor& a, Real floor) {
  return unary(
      a, [floor](Real x) { return std::sqrt(std::max(x, floor)); },
      [floor](Real x, Real y) { return x > floor ? Real(0.5) / y : Real(0); });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, [](Real x) { return std::tanh(x); },
      [](Real, Real y) { return Real(1) - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a, [](Real x) { return Real(1) / (Real(1) + std::exp(-x)); },
      [](Real, Real y) { return y * (Real(1) - y); });
}

Tensor log_sigmoid(const Tensor& a) {
  // log(sigmoid(x)) = -softplus(-x); derivative sigmoid(-x).
  return unary(
      a,
      [](Real x) {
        return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
      },
      [](Real x, Real) { return Real(1) / (Real(1) + std::exp(x)); });
}

Tensor softplus(const Tensor& a) {
  return unary(
      a,
      [](Real x) {
        return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
      },
      [](Real x, Real) { return Real(1) / (Real(1) + std::exp(-x)); });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, [](Real x) { return x > 0 ? x : Real(0); },
      [](Real x, Real) { return x > 0 ? Real(1) : Real(0); });
}

Tensor leaky_relu(const Tensor& a, Real slope) {
  return unary(
      a, [slope](Real x) { return x > 0 ? x : slope * x; },
      [slope](Real x, Real) { return x > 0 ? Real(1) : slope; });
}

Tensor square(const Tensor& a) {
  return unary(
      a, [](Real x) { return x * x; }, [](Real x, Real) { return 2 * x; });
}

Tensor abs(const Tensor& a) {
  return unary(
      a, [](Real x) { return std::abs(x); },
      [](Real x, Real) {
        return x > 0 ? Real(1) : (x < 0 ? Real(-1) : Real(0));
      });
}

Tensor sin(const Tensor& a) {
  return unary(
      a, [](Real x) { return std::sin(x); },
      [](Real x, Real) { return std::cos(x); });
}

Tensor sum(const Tensor& a) {
  Matrix out(1, 1);
  out(0, 0) = static_cast<Real>(a.value().cast<double>().sum());
  return Tensor::from_op(std::move(out), {a}, [](Node& n) {
    Node& x = input(n, 0);
    x.accumulate(Matrix::Constant(x.value.rows(), x.value.cols(), n.grad(0, 0)));
  });
}

Tensor mean(const Tensor& a) {
  require(a.value().size() > 0, "mean of an empty tensor");
  return scale(sum(a), Real(1) / static_cast<Real>(a.value().size()));
}

Tensor sum_rows(const Tensor& a) {
  Matrix out = a.value().colwise().sum();
  return Tensor::from_op(std::move(out), {a}, [](Node& n) {
    Node& x = input(n, 0);
    x.accumulate(n.grad.replicate(x.value.rows(), 1));
  });
}

Tensor mean_rows(const Tensor& a) {
  require(a.rows() > 0, "mean_rows of an empty tensor");
  return scale(sum_rows(a), Real(1) / static_cast<Real>(a.rows()));
}

Tensor sum_cols(const Tensor& a) {
  Matrix out = a.value().rowwise().sum();
  return Tensor::from_op(std::move(out), {a}, [](Node& n) {
    Node& x = input(n, 0);
    x.accumulate(n.grad.replicate(1, x.value.cols()));
  });
}

Tensor softmax_rows(const Tensor& a) {
  Matrix out = a.value();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return Tensor::from_op(std::move(out), {a}, [](Node& n) {
    const Matrix& y = n.value;
    Eigen::Matrix<Real, Eigen::Dynamic, 1> dot =
        n.grad.cwiseProduct(y).rowwise().sum();
    Matrix g = y.cwiseProduct(Matrix(n.grad.colwise() - dot));
    input(n, 0).accumulate(g);
  });
}

Tensor log_softmax_rows(const Tensor& a) {
  Matrix out = a.value();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const Real m = row.maxCoeff();
    const Real lse = m + std::log((row.array() - m).exp().sum());
    row.array() -= lse;
  }
  return Tensor::from_op(std::move(out), {a}, [](Node& n) {
    Eigen::Matrix<Real, Eigen::Dynamic, 1> gsum = n.grad.rowwise().sum();
    Matrix soft = n.value.array().exp();
    Matrix g = n.grad - Matrix(soft.array().colwise() * gsum.array());
    input(n, 0).accumulate(g);
  });
}

Tensor softmax_cols(const Tensor& a) {
  return transpose(softmax_rows(transpose(a)));
}

Tensor layer_norm_rows(const Tensor& x, const Tensor& gamma,
                       const Tensor& beta, Real eps) {
  const Eigen::Index cols = x.cols();
  require(gamma.cols() == cols && beta.cols() == cols,
          "layer_norm_rows: parameter width mismatch");
  Matrix xhat(x.rows(), cols);
  Eigen::Matrix<Real, Eigen::Dynamic, 1> inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const auto row = x.value().row(r);
    const Real mu = row.mean();
    const Real var = (row.array() - mu).square().mean();
    inv_std(r) = Real(1) / std::sqrt(var + eps);
    xhat.row(r) = (row.array() - mu) * inv_std(r);
  }
  Matrix out = (xhat.array().rowwise() * gamma.value().row(0).array())
                   .rowwise() +
               beta.value().row(0).array();
  return Tensor::from_op(
      std::move(out), {x, gamma, beta},
      [xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& n) {
        Node& xin = input(n, 0);
        Node& g = input(n, 1);
        Node& b = input(n, 2);
        if (g.requires_grad)
          g.accumulate(n.grad.cwiseProduct(xhat).colwise().sum());
        if (b.requires_grad) b.accumulate(n.grad.colwise().sum());
        if (xin.requires_grad) {
          Matrix dxhat = n.grad.array().rowwise() * g.value.row(0).array();
          const Real c = static_cast<Real>(dxhat.cols());
          Matrix dx(dxhat.rows(), dxhat.cols());
          for (Eigen::Index r = 0; r < dxhat.rows(); ++r) {
            const Real m1 = dxhat.row(r).mean();
            const Real m2 = dxhat.row(r).dot(xhat.row(r)) / c;
            dx.row(r) = inv_std(r) * (dxhat.row(r).array() - m1 -
                                      xhat.row(r).array() * m2);
          }
          xin.accumulate(dx);
        }
      });
}

Tensor slice_rows(const Tensor& a, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.rows(),
          "slice_rows: range out of bounds");
  Matrix out = a.value().middleRows(start, count);
  return Tensor::from_op(std::move(out), {a}, [start, count](Node& n) {
    Node& x = input(n, 0);
    Matrix g = Matrix::Zero(x.value.rows(), x.value.cols());
    g.middleRows(start, count) = n.grad;
    x.accumulate(g);
  });
}

Tensor slice_cols(const Tensor& a, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.cols(),
          "slice_cols: range out of bounds");
  Matrix out = a.value().middleCols(start, count);
  return Tensor::from_op(std::move(out), {a}, [start, count](Node& n) {
    Node& x = input(n, 0);
    Matrix g = Matrix::Zero(x.value.rows(), x.value.cols());
    g.middleCols(start, count) = n.grad;
    x.accumulate(g);
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    require(p.rows() == parts[0].rows(), "concat_cols: row count mismatch");
    total += p.cols();
  }
  Matrix out(parts[0].rows(), total);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  return Tensor::from_op(std::move(out), parts, [](Node& n) {
    Eigen::Index off = 0;
    for (auto& in : n.inputs) {
      const Eigen::Index c = in->value.cols();
      if (in->requires_grad) in->accumulate(n.grad.middleCols(off, c));
      off += c;
    }
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_rows: no inputs");
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    require(p.cols() == parts[0].cols(), "concat_rows: column count mismatch");
    total += p.rows();
  }
  Matrix out(total, parts[0].cols());
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    out.middleRows(offset, p.rows()) = p.value();
    offset += p.rows();
  }
  return Tensor::from_op(std::move(out), parts, [](Node& n) {
    Eigen::Index off = 0;
    for (auto& in : n.inputs) {
      const Eigen::Index r = in->value.rows();
      if (in->requires_grad) in->accumulate(n.grad.middleRows(off, r));
      off += r;
    }
  });
}

Tensor flip_cols(const Tensor& a) {
  Matrix out = a.value().rowwise().reverse();
  return Tensor::from_op(std::move(out), {a}, [](Node& n) {
    input(n, 0).accumulate(n.grad.rowwise().reverse());
  });
}

Tensor transpose(const Tensor& a) {
  Matrix out = a.value().transpose();
  return Tensor::from_op(std::move(out), {a}, [](Node& n) {
    input(n, 0).accumulate(n.grad.transpose());
  });
}

Tensor reshape(const Tensor& a, Eigen::Index rows, Eigen::Index cols) {
  require(rows * cols == a.value().size(), "reshape: element count mismatch");
  Matrix out = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
  return Tensor::from_op(std::move(out), {a}, [](Node& n) {
    Node& x = input(n, 0);
    x.accumulate(
        Eigen::Map<const Matrix>(n.grad.data(), x.value.rows(), x.value.cols()));
  });
}

Tensor gather_rows(const Tensor& table, std::span<const int> ids) {
  std::vector<int> idx(ids.begin(), ids.end());
  Matrix out(static_cast<Eigen::Index>(idx.size()), table.cols());
  for (size_t i = 0; i < idx.size(); ++i) {
    require(idx[i] >= 0 && idx[i] < table.rows(),
            "gather_rows: index " + std::to_string(idx[i]) + " out of range");
    out.row(static_cast<Eigen::Index>(i)) = table.value().row(idx[i]);
  }
  return Tensor::from_op(std::move(out), {table}, [idx](Node& n) {
    Node& t = input(n, 0);
    Matrix g = Matrix::Zero(t.value.rows(), t.value.cols());
    for (size_t i = 0; i < idx.size(); ++i)
      g.row(idx[i]) += n.grad.row(static_cast<Eigen::Index>(i));
    t.accumulate(g);
  });
}

Tensor detach(const Tensor& a) { return constant(a.value()); }

ConvGeometry ConvGeometry::same(int kernel, int dilation, int stride) {
  ConvGeometry g;
  g.kernel = kernel;
  g.dilation = dilation;
  g.stride = stride;
  const int total = dilation * (kernel - 1);
  g.pad_left = total / 2;
  g.pad_right = total - total / 2;
  return g;
}

Eigen::Index ConvGeometry::output_length(Eigen::Index input_length) const {
  const Eigen::Index span = static_cast<Eigen::Index>(dilation) * (kernel - 1) + 1;
  const Eigen::Index padded = input_length + pad_left + pad_right;
  if (padded < span) return 0;
  return (padded - span) / stride + 1;
}

Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              const ConvGeometry& geom) {
  const Eigen::Index cin = x.cols();
  const Eigen::Index len = x.rows();
  require(weight.rows() == geom.kernel * cin,
          "conv1d: weight rows " + std::to_string(weight.rows()) +
              " != kernel*in_channels " + std::to_string(geom.kernel * cin));
  require(bias.rows() == 1 && bias.cols() == weight.cols(),
          "conv1d: bias shape mismatch");
  const Eigen::Index tout = geom.output_length(len);
  require(tout > 0, "conv1d: input shorter than the receptive field");

  // im2col: cols[t, k*cin + c] = x[t*stride + k*dilation - pad_left, c].
  Matrix cols = Matrix::Zero(tout, geom.kernel * cin);
  for (Eigen::Index t = 0; t < tout; ++t) {
    for (int k = 0; k < geom.kernel; ++k) {
      const Eigen::Index src = t * geom.stride +
                               static_cast<Eigen::Index>(k) * geom.dilation -
                               geom.pad_left;
      if (src < 0 || src >= len) continue;
      cols.block(t, k * cin, 1, cin) = x.value().row(src);
    }
  }
  Matrix out;
  out.noalias() = cols * weight.value();
  out.rowwise() += bias.value().row(0);
  return Tensor::from_op(
      std::move(out), {x, weight, bias},
      [cols = std::move(cols), geom, cin, len](Node& n) {
        Node& xin = input(n, 0);
        Node& w = input(n, 1);
        Node& b = input(n, 2);
        if (w.requires_grad) {
          Matrix g;
          g.noalias() = cols.transpose() * n.grad;
          w.accumulate(g);
        }
        if (b.requires_grad) b.accumulate(n.grad.colwise().sum());
        if (xin.requires_grad) {
          Matrix dcols;
          dcols.noalias() = n.grad * w.value.transpose();
          Matrix dx = Matrix::Zero(len, cin);
          for (Eigen::Index t = 0; t < dcols.rows(); ++t) {
            for (int k = 0; k < geom.kernel; ++k) {
              const Eigen::Index src =
                  t * geom.stride +
                  static_cast<Eigen::Index>(k) * geom.dilation - geom.pad_left;
              if (src < 0 || src >= len) continue;
              dx.row(src) += dcols.block(t, k * cin, 1, cin);
            }
          }
          xin.accumulate(dx);
        }
      });
}

Tensor conv_transpose1d(const Tensor& x, const Tensor& weight,
                        const Tensor& bias, int kernel, int stride,
                        int padding) {
  const Eigen::Index cin = x.cols();
  const Eigen::Index len = x.rows();
  require(weight.rows() == cin && weight.cols() % kernel == 0,
          "conv_transpose1d: weight shape mismatch");
  const Eigen::Index cout = weight.cols() / kernel;
  require(bias.rows() == 1 && bias.cols() == cout,
          "conv_transpose1d: bias shape mismatch");
  const Eigen::Index full = (len - 1) * stride + kernel;
  const Eigen::Index tout = full - 2 * padding;
  require(tout > 0, "conv_transpose1d: empty output");

  Matrix proj;
  proj.noalias() = x.value() * weight.value();  // [len x K*cout]
  Matrix out = Matrix::Zero(tout, cout);
  for (Eigen::Index t = 0; t < len; ++t) {
    for (int k = 0; k < kernel; ++k) {
      const Eigen::Index dst = t * stride + k - padding;
      if (dst < 0 || dst >= tout) continue;
      out.row(dst) += proj.block(t, k * cout, 1, cout);
    }
  }
  out.rowwise() += bias.value().row(0);
  return Tensor::from_op(
      std::move(out), {x, weight, bias},
      [kernel, stride, padding, len, cout](Node& n) {
        Node& xin = input(n, 0);
        Node& w = input(n, 1);
        Node& b = input(n, 2);
        const Eigen::Index tout = n.grad.rows();
        Matrix dproj = Matrix::Zero(len, kernel * cout);
        for (Eigen::Index t = 0; t < len; ++t) {
          for (int k = 0; k < kernel; ++k) {
            const Eigen::Index dst = t * stride + k - padding;
            if (dst < 0 || dst >= tout) continue;
            dproj.block(t, k * cout, 1, cout) = n.grad.row(dst);
          }
        }
        if (b.requires_grad) b.accumulate(n.grad.colwise().sum());
        if (w.requires_grad) {
          Matrix g;
          g.noalias() = xin.value.transpose() * dproj;
          w.accumulate(g);
        }
        if (xin.requires_grad) {
          Matrix g;
          g.noalias() = dproj * w.value.transpose();
          xin.accumulate(g);
        }
      });
}

Tensor avg_pool_rows(const Tensor& x, int kernel, int stride, int padding) {
  const Eigen::Index len = x.rows();
  const Eigen::Index tout = (len + 2 * padding - kernel) / stride + 1;
  require(tout > 0, "avg_pool_rows: input too short");
  Matrix out = Matrix::Zero(tout, x.cols());
  const Real inv = Real(1) / static_cast<Real>(kernel);
  for (Eigen::Index t = 0; t < tout; ++t) {
    for (int k = 0; k < kernel; ++k) {
      const Eigen::Index src = t * stride + k - padding;
      if (src < 0 || src >= len) continue;
      out.row(t) += x.value().row(src);
    }
  }
  out *= inv;
  return Tensor::from_op(
      std::move(out), {x}, [kernel, stride, padding, len, inv](Node& n) {
        Node& xin = input(n, 0);
        Matrix g = Matrix::Zero(len, xin.value.cols());
        for (Eigen::Index t = 0; t < n.grad.rows(); ++t) {
          for (int k = 0; k < kernel; ++k) {
            const Eigen::Index src = t * stride + k - padding;
            if (src < 0 || src >= len) continue;
            g.row(src) += inv * n.grad.row(t);
          }
        }
        xin.accumulate(g);
      });
}

Tensor frame_signal(const Tensor& x, int frame_len, int hop) {
  require(x.cols() == 1, "frame_signal: expected a single-channel signal");
  const Eigen::Index len = x.rows();
  const int pad = frame_len / 2;
  require(len > pad, "frame_signal: signal shorter than half a frame");
  const Eigen::Index frames = len / hop + 1;
  auto reflect = [len](Eigen::Index j) {
    if (j < 0) return -j;
    if (j >= len) return 2 * (len - 1) - j;
    return j;
  };
  Matrix out(frames, frame_len);
  for (Eigen::Index f = 0; f < frames; ++f)
    for (int k = 0; k < frame_len; ++k)
      out(f, k) = x.value()(reflect(f * hop + k - pad), 0);
  return Tensor::from_op(
      std::move(out), {x}, [frame_len, hop, pad, len, reflect](Node& n) {
        Matrix g = Matrix::Zero(len, 1);
        for (Eigen::Index f = 0; f < n.grad.rows(); ++f)
          for (int k = 0; k < frame_len; ++k)
            g(reflect(f * hop + k - pad), 0) += n.grad(f, k);
        input(n, 0).accumulate(g);
      });
}

}  // namespace svs::nn
