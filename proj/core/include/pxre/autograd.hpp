// Copyright 2026 The pxre Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pxre/rng.hpp"

// Minimal reverse-mode automatic differentiation over dense double
// matrices. Rows index sequence positions; columns index features.

namespace pxre::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

/// A trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
  Eigen::Index size() const { return value.size(); }
};

/// N(0, std^2) initialized rows x cols parameter.
Parameter normal_parameter(std::string name, Eigen::Index rows, Eigen::Index cols, double std,
                           Rng& rng);
Parameter constant_parameter(std::string name, Eigen::Index rows, Eigen::Index cols,
                             double value);

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}
  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// When false, ops skip recording backward closures (inference).
  explicit Tape(bool record) : record_(record) {}

  Var constant(Matrix value);
  /// Leaf bound to a parameter; backward() accumulates into param.grad.
  Var param(Parameter& p);

  Var matmul(Var a, Var b);
  /// a * b^T
  Var matmul_nt(Var a, Var b);
  Var add(Var a, Var b);
  /// Adds a 1 x cols row to every row of a.
  Var add_row(Var a, Var row);
  Var scale(Var a, double factor);
  Var gelu(Var a);
  /// Row-wise layer normalization with learned 1 x cols gain and bias.
  Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
  Var softmax_rows(Var a);
  Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
  Var concat_cols(std::span<const Var> parts);
  /// Row i of the result is row ids[i] of table.
  Var gather_rows(Var table, std::span<const int> ids);
  /// Column j of the result is column cols[j] of a.
  Var gather_cols(Var a, std::span<const int> cols);
  /// Inverted dropout; identity when p == 0.
  Var dropout(Var a, double p, Rng& rng);
  /// Mean negative log-likelihood of targets under row-wise softmax(logits).
  /// Rows whose target is negative are ignored. Returns a 1x1 node.
  Var cross_entropy(Var logits, std::span<const int> targets);
  /// Sum of 1x1 nodes weighted by `weights`.
  Var weighted_sum(std::span<const Var> scalars, std::span<const double> weights);

  /// Seeds d(out)/d(out) = 1 for a 1x1 node and propagates to parameters.
  void backward(Var out);

  std::size_t size() const { return nodes_.size(); }

 private:
  friend class Var;
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;  // parameter leaves alias the parameter
    Matrix grad;

    const Matrix& get() const { return external ? *external : value; }
    bool needs_grad = false;
    Parameter* param = nullptr;
    std::function<void()> backward;
  };

  Var push(Matrix value, bool needs_grad);
  Node& node(Var v) { return nodes_[v.index_]; }
  const Node& node(Var v) const { return nodes_[v.index_]; }
  Matrix& grad_of(std::size_t index);
  bool needs(Var v) const { return nodes_[v.index_].needs_grad; }
  void check(Var v) const;

  bool record_ = true;
  std::deque<Node> nodes_;
};

/// Adam with optional decoupled weight decay and global-norm clipping.
class Adam {
 public:
  struct Options {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    double clip_norm = 0.0;  // 0 disables clipping
  };

  Adam(std::vector<Parameter*> params, Options options);

  void zero_grad();
  /// Applies one update from the accumulated gradients. Returns the
  /// pre-clipping global gradient norm.
  double step();

 private:
  std::vector<Parameter*> params_;
  Options options_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long steps_ = 0;
};

}  // namespace pxre::nn
