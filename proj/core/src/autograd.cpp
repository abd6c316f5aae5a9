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

#include "pxre/autograd.hpp"

#include <cmath>
#include <limits>

#include "pxre/error.hpp"

namespace pxre::nn {
namespace {

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluK = 0.044715;

void require(bool ok, const char* what) {
  if (!ok) throw ModelError(std::string("autograd: ") + what);
}

}  // namespace

Parameter normal_parameter(std::string name, Eigen::Index rows, Eigen::Index cols, double std,
                           Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std * rng.normal();
  return Parameter(std::move(name), std::move(m));
}

Parameter constant_parameter(std::string name, Eigen::Index rows, Eigen::Index cols,
                             double value) {
  return Parameter(std::move(name), Matrix::Constant(rows, cols, value));
}

const Matrix& Var::value() const {
  require(tape_ != nullptr, "use of an unbound Var");
  return tape_->nodes_[index_].get();
}

void Tape::check(Var v) const {
  require(v.tape_ == this && v.index_ < nodes_.size(), "Var belongs to another tape");
}

Var Tape::push(Matrix value, bool needs_grad) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad && record_;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Matrix& Tape::grad_of(std::size_t index) {
  Node& n = nodes_[index];
  const Matrix& v = n.get();
  if (n.grad.rows() != v.rows() || n.grad.cols() != v.cols()) n.grad = Matrix::Zero(v.rows(), v.cols());
  return n.grad;
}

Var Tape::constant(Matrix value) { return push(std::move(value), false); }

Var Tape::param(Parameter& p) {
  Node n;
  n.external = &p.value;
  n.needs_grad = record_;
  n.param = &p;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::matmul(Var a, Var b) {
  check(a);
  check(b);
  require(a.cols() == b.rows(), "matmul shape mismatch");
  Var out = push(a.value() * b.value(), needs(a) || needs(b));
  if (node(out).needs_grad) {
    const auto ia = a.index_, ib = b.index_, io = out.index_;
    node(out).backward = [this, ia, ib, io] {
      const Matrix& g = nodes_[io].grad;
      if (nodes_[ia].needs_grad) grad_of(ia).noalias() += g * nodes_[ib].get().transpose();
      if (nodes_[ib].needs_grad) grad_of(ib).noalias() += nodes_[ia].get().transpose() * g;
    };
  }
  return out;
}

Var Tape::matmul_nt(Var a, Var b) {
  check(a);
  check(b);
  require(a.cols() == b.cols(), "matmul_nt shape mismatch");
  Var out = push(a.value() * b.value().transpose(), needs(a) || needs(b));
  if (node(out).needs_grad) {
    const auto ia = a.index_, ib = b.index_, io = out.index_;
    node(out).backward = [this, ia, ib, io] {
      const Matrix& g = nodes_[io].grad;
      if (nodes_[ia].needs_grad) grad_of(ia).noalias() += g * nodes_[ib].get();
      if (nodes_[ib].needs_grad) grad_of(ib).noalias() += g.transpose() * nodes_[ia].get();
    };
  }
  return out;
}

Var Tape::add(Var a, Var b) {
  check(a);
  check(b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add shape mismatch");
  Var out = push(a.value() + b.value(), needs(a) || needs(b));
  if (node(out).needs_grad) {
    const auto ia = a.index_, ib = b.index_, io = out.index_;
    node(out).backward = [this, ia, ib, io] {
      const Matrix& g = nodes_[io].grad;
      if (nodes_[ia].needs_grad) grad_of(ia) += g;
      if (nodes_[ib].needs_grad) grad_of(ib) += g;
    };
  }
  return out;
}

Var Tape::add_row(Var a, Var row) {
  check(a);
  check(row);
  require(row.rows() == 1 && row.cols() == a.cols(), "add_row shape mismatch");
  Matrix value = a.value();
  value.rowwise() += row.value().row(0);
  Var out = push(std::move(value), needs(a) || needs(row));
  if (node(out).needs_grad) {
    const auto ia = a.index_, ir = row.index_, io = out.index_;
    node(out).backward = [this, ia, ir, io] {
      const Matrix& g = nodes_[io].grad;
      if (nodes_[ia].needs_grad) grad_of(ia) += g;
      if (nodes_[ir].needs_grad) grad_of(ir) += g.colwise().sum();
    };
  }
  return out;
}

Var Tape::scale(Var a, double factor) {
  check(a);
  Var out = push(a.value() * factor, needs(a));
  if (node(out).needs_grad) {
    const auto ia = a.index_, io = out.index_;
    node(out).backward = [this, ia, io, factor] { grad_of(ia) += nodes_[io].grad * factor; };
  }
  return out;
}

Var Tape::gelu(Var a) {
  check(a);
  const Matrix& x = a.value();
  Matrix t = (kGeluC * (x.array() + kGeluK * x.array().cube())).tanh().matrix();
  Matrix y = (0.5 * x.array() * (1.0 + t.array())).matrix();
  Var out = push(std::move(y), needs(a));
  if (node(out).needs_grad) {
    const auto ia = a.index_, io = out.index_;
    node(out).backward = [this, ia, io, t = std::move(t)] {
      const Matrix& x = nodes_[ia].get();
      const Matrix dt = ((1.0 - t.array().square()) * kGeluC *
                         (1.0 + 3.0 * kGeluK * x.array().square())).matrix();
      const Matrix dy = (0.5 * (1.0 + t.array()) + 0.5 * x.array() * dt.array()).matrix();
      grad_of(ia).array() += nodes_[io].grad.array() * dy.array();
    };
  }
  return out;
}

Var Tape::layer_norm(Var x, Var gain, Var bias, double eps) {
  check(x);
  check(gain);
  check(bias);
  const Eigen::Index d = x.cols();
  require(gain.rows() == 1 && gain.cols() == d && bias.rows() == 1 && bias.cols() == d,
          "layer_norm parameter shape mismatch");
  const Matrix& in = x.value();
  Matrix xhat(in.rows(), d);
  Eigen::VectorXd inv_std(in.rows());
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    const double mean = in.row(r).mean();
    const double var = (in.row(r).array() - mean).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (in.row(r).array() - mean) * inv_std(r);
  }
  Matrix y = xhat;
  y.array().rowwise() *= gain.value().row(0).array();
  y.rowwise() += bias.value().row(0);
  Var out = push(std::move(y), needs(x) || needs(gain) || needs(bias));
  if (node(out).needs_grad) {
    const auto ix = x.index_, ig = gain.index_, ib = bias.index_, io = out.index_;
    node(out).backward = [this, ix, ig, ib, io, xhat = std::move(xhat),
                          inv_std = std::move(inv_std), d] {
      const Matrix& g = nodes_[io].grad;
      if (nodes_[ig].needs_grad) grad_of(ig) += (g.array() * xhat.array()).colwise().sum().matrix();
      if (nodes_[ib].needs_grad) grad_of(ib) += g.colwise().sum();
      if (nodes_[ix].needs_grad) {
        Matrix dxhat = g;
        dxhat.array().rowwise() *= nodes_[ig].get().row(0).array();
        Matrix& gx = grad_of(ix);
        for (Eigen::Index r = 0; r < dxhat.rows(); ++r) {
          const double mean_d = dxhat.row(r).mean();
          const double mean_dx = dxhat.row(r).dot(xhat.row(r)) / static_cast<double>(d);
          gx.row(r).array() +=
              inv_std(r) * (dxhat.row(r).array() - mean_d - xhat.row(r).array() * mean_dx);
        }
      }
    };
  }
  return out;
}

Var Tape::softmax_rows(Var a) {
  check(a);
  const Matrix& x = a.value();
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    require(std::isfinite(m), "softmax row has no finite entry");
    y.row(r) = (x.row(r).array() - m).exp();
    y.row(r) /= y.row(r).sum();
  }
  Var out = push(std::move(y), needs(a));
  if (node(out).needs_grad) {
    const auto ia = a.index_, io = out.index_;
    node(out).backward = [this, ia, io] {
      const Matrix& yv = nodes_[io].value;
      const Matrix& g = nodes_[io].grad;
      Matrix& gx = grad_of(ia);
      for (Eigen::Index r = 0; r < yv.rows(); ++r) {
        const double dot = g.row(r).dot(yv.row(r));
        gx.row(r).array() += yv.row(r).array() * (g.row(r).array() - dot);
      }
    };
  }
  return out;
}

Var Tape::slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  check(a);
  require(start >= 0 && count >= 0 && start + count <= a.cols(), "slice_cols out of range");
  Var out = push(a.value().middleCols(start, count), needs(a));
  if (node(out).needs_grad) {
    const auto ia = a.index_, io = out.index_;
    node(out).backward = [this, ia, io, start, count] {
      grad_of(ia).middleCols(start, count) += nodes_[io].grad;
    };
  }
  return out;
}

Var Tape::concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols of nothing");
  Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  bool grad = false;
  for (const Var& p : parts) {
    check(p);
    require(p.rows() == rows, "concat_cols row mismatch");
    cols += p.cols();
    grad |= needs(p);
  }
  Matrix value(rows, cols);
  std::vector<std::size_t> indices;
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    value.middleCols(at, p.cols()) = p.value();
    at += p.cols();
    indices.push_back(p.index_);
  }
  Var out = push(std::move(value), grad);
  if (node(out).needs_grad) {
    const auto io = out.index_;
    node(out).backward = [this, io, indices = std::move(indices)] {
      Eigen::Index at = 0;
      for (auto idx : indices) {
        const auto width = nodes_[idx].get().cols();
        if (nodes_[idx].needs_grad) grad_of(idx) += nodes_[io].grad.middleCols(at, width);
        at += width;
      }
    };
  }
  return out;
}

Var Tape::gather_rows(Var table, std::span<const int> ids) {
  check(table);
  const Matrix& t = table.value();
  Matrix value(static_cast<Eigen::Index>(ids.size()), t.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] >= 0 && ids[i] < t.rows(), "gather_rows id out of range");
    value.row(static_cast<Eigen::Index>(i)) = t.row(ids[i]);
  }
  Var out = push(std::move(value), needs(table));
  if (node(out).needs_grad) {
    const auto it = table.index_, io = out.index_;
    node(out).backward = [this, it, io, ids = std::vector<int>(ids.begin(), ids.end())] {
      Matrix& gt = grad_of(it);
      const Matrix& g = nodes_[io].grad;
      for (std::size_t i = 0; i < ids.size(); ++i) gt.row(ids[i]) += g.row(static_cast<Eigen::Index>(i));
    };
  }
  return out;
}

Var Tape::gather_cols(Var a, std::span<const int> cols) {
  check(a);
  const Matrix& x = a.value();
  Matrix value(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    require(cols[j] >= 0 && cols[j] < x.cols(), "gather_cols index out of range");
    value.col(static_cast<Eigen::Index>(j)) = x.col(cols[j]);
  }
  Var out = push(std::move(value), needs(a));
  if (node(out).needs_grad) {
    const auto ia = a.index_, io = out.index_;
    node(out).backward = [this, ia, io, cols = std::vector<int>(cols.begin(), cols.end())] {
      Matrix& gx = grad_of(ia);
      const Matrix& g = nodes_[io].grad;
      for (std::size_t j = 0; j < cols.size(); ++j) gx.col(cols[j]) += g.col(static_cast<Eigen::Index>(j));
    };
  }
  return out;
}

Var Tape::dropout(Var a, double p, Rng& rng) {
  check(a);
  if (p <= 0.0) return a;
  require(p < 1.0, "dropout probability must be < 1");
  Matrix mask(a.rows(), a.cols());
  const double keep_scale = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng.uniform() < p ? 0.0 : keep_scale;
  Var out = push((a.value().array() * mask.array()).matrix(), needs(a));
  if (node(out).needs_grad) {
    const auto ia = a.index_, io = out.index_;
    node(out).backward = [this, ia, io, mask = std::move(mask)] {
      grad_of(ia).array() += nodes_[io].grad.array() * mask.array();
    };
  }
  return out;
}

Var Tape::cross_entropy(Var logits, std::span<const int> targets) {
  check(logits);
  const Matrix& z = logits.value();
  require(static_cast<Eigen::Index>(targets.size()) == z.rows(), "cross_entropy target count");
  Matrix probs(z.rows(), z.cols());
  double total = 0.0;
  int counted = 0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double m = z.row(r).maxCoeff();
    probs.row(r) = (z.row(r).array() - m).exp();
    const double sum = probs.row(r).sum();
    probs.row(r) /= sum;
    const int t = targets[static_cast<std::size_t>(r)];
    if (t < 0) continue;
    require(t < z.cols(), "cross_entropy target out of range");
    total += -(z(r, t) - m - std::log(sum));
    ++counted;
  }
  require(counted > 0, "cross_entropy with no counted targets");
  Matrix value(1, 1);
  value(0, 0) = total / counted;
  Var out = push(std::move(value), needs(logits));
  if (node(out).needs_grad) {
    const auto il = logits.index_, io = out.index_;
    node(out).backward = [this, il, io, probs = std::move(probs),
                          targets = std::vector<int>(targets.begin(), targets.end()), counted] {
      const double g = nodes_[io].grad(0, 0) / counted;
      Matrix& gz = grad_of(il);
      for (Eigen::Index r = 0; r < probs.rows(); ++r) {
        const int t = targets[static_cast<std::size_t>(r)];
        if (t < 0) continue;
        gz.row(r) += g * probs.row(r);
        gz(r, t) -= g;
      }
    };
  }
  return out;
}

Var Tape::weighted_sum(std::span<const Var> scalars, std::span<const double> weights) {
  require(!scalars.empty() && scalars.size() == weights.size(), "weighted_sum arity");
  double total = 0.0;
  bool grad = false;
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    check(scalars[i]);
    require(scalars[i].rows() == 1 && scalars[i].cols() == 1, "weighted_sum expects 1x1 nodes");
    total += weights[i] * scalars[i].value()(0, 0);
    grad |= needs(scalars[i]);
    indices.push_back(scalars[i].index_);
  }
  Matrix value(1, 1);
  value(0, 0) = total;
  Var out = push(std::move(value), grad);
  if (node(out).needs_grad) {
    const auto io = out.index_;
    node(out).backward = [this, io, indices = std::move(indices),
                          w = std::vector<double>(weights.begin(), weights.end())] {
      const double g = nodes_[io].grad(0, 0);
      for (std::size_t i = 0; i < indices.size(); ++i) {
        if (nodes_[indices[i]].needs_grad) grad_of(indices[i])(0, 0) += g * w[i];
      }
    };
  }
  return out;
}

void Tape::backward(Var out) {
  check(out);
  require(out.rows() == 1 && out.cols() == 1, "backward expects a scalar node");
  if (!node(out).needs_grad) return;
  grad_of(out.index_)(0, 0) += 1.0;
  for (std::size_t i = out.index_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.backward) n.backward();
    if (n.param) n.param->grad += n.grad;
  }
}

Adam::Adam(std::vector<Parameter*> params, Options options)
    : params_(std::move(params)), options_(options) {
  for (auto* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

double Adam::step() {
  double sq = 0.0;
  for (auto* p : params_) sq += p->grad.squaredNorm();
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw ModelError("non-finite gradient norm");
  const double clip = (options_.clip_norm > 0.0 && norm > options_.clip_norm)
                          ? options_.clip_norm / norm
                          : 1.0;
  ++steps_;
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    const Matrix g = p.grad * clip;
    m_[i] = options_.beta1 * m_[i] + (1.0 - options_.beta1) * g;
    v_[i] = options_.beta2 * v_[i] + (1.0 - options_.beta2) * g.cwiseProduct(g);
    if (options_.weight_decay > 0.0) p.value *= 1.0 - options_.lr * options_.weight_decay;
    p.value.array() -= options_.lr * (m_[i].array() / bc1) /
                       ((v_[i].array() / bc2).sqrt() + options_.eps);
  }
  return norm;
}

}  // namespace pxre::nn
