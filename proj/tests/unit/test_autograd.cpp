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

#include <cmath>

#include "doctest.h"
#include "pxre/autograd.hpp"
#include "pxre/error.hpp"
#include "support/gradcheck.hpp"

using namespace pxre;
using pxre::testing::grad_check;
using pxre::testing::random_projection;

namespace {

constexpr double kTol = 1e-6;

nn::Parameter rand_param(const char* name, int r, int c, std::uint64_t seed) {
  Rng rng(seed);
  return nn::normal_parameter(name, r, c, 1.0, rng);
}

}  // namespace

TEST_SUITE("autograd") {
  TEST_CASE("matmul, matmul_nt, add, add_row, scale") {
    auto a = rand_param("a", 3, 4, 1);
    auto b = rand_param("b", 4, 2, 2);
    auto c = rand_param("c", 5, 4, 3);
    auto row = rand_param("row", 1, 2, 4);
    auto g = grad_check({&a, &b, &c, &row},
                        [&](nn::Tape& t) {
                          Rng r(9);
                          auto ab = t.matmul(t.param(a), t.param(b));
                          auto nt = t.matmul_nt(t.param(a), t.param(c));  // 3 x 5
                          auto sum = t.add(t.scale(ab, 0.7), t.slice_cols(nt, 1, 2));
                          return random_projection(t, t.add_row(sum, t.param(row)), r);
                        },
                        40, 11);
    CHECK(g.max_rel_error < kTol);
  }

  TEST_CASE("gelu, layer_norm, softmax_rows") {
    auto x = rand_param("x", 4, 6, 5);
    auto gain = rand_param("gain", 1, 6, 6);
    auto bias = rand_param("bias", 1, 6, 7);
    auto g = grad_check({&x, &gain, &bias},
                        [&](nn::Tape& t) {
                          Rng r(3);
                          auto y = t.layer_norm(t.gelu(t.param(x)), t.param(gain), t.param(bias));
                          return random_projection(t, t.softmax_rows(y), r);
                        },
                        40, 12);
    CHECK(g.max_rel_error < kTol);
  }

  TEST_CASE("slice, concat, gather_rows, gather_cols") {
    auto x = rand_param("x", 5, 6, 8);
    const std::vector<int> rows{4, 0, 4, 2};
    const std::vector<int> cols{4, 1, 1};
    auto g = grad_check({&x},
                        [&](nn::Tape& t) {
                          Rng r(4);
                          auto px = t.param(x);
                          const nn::Var parts[] = {t.slice_cols(px, 0, 2), t.slice_cols(px, 3, 3)};
                          auto cat = t.concat_cols(parts);
                          auto gr = t.gather_rows(cat, rows);
                          return random_projection(t, t.gather_cols(gr, cols), r);
                        },
                        30, 13);
    CHECK(g.max_rel_error < kTol);
  }

  TEST_CASE("cross_entropy and weighted_sum") {
    auto logits = rand_param("logits", 4, 5, 9);
    const std::vector<int> targets{1, -1, 4, 0};
    auto g = grad_check({&logits},
                        [&](nn::Tape& t) {
                          auto pl = t.param(logits);
                          const nn::Var parts[] = {t.cross_entropy(pl, targets),
                                                   t.cross_entropy(t.scale(pl, 2.0), targets)};
                          const double w[] = {0.3, 1.5};
                          return t.weighted_sum(parts, w);
                        },
                        20, 14);
    CHECK(g.max_rel_error < kTol);
  }

  TEST_CASE("cross_entropy values") {
    nn::Tape t;
    nn::Matrix uniform = nn::Matrix::Zero(2, 18);
    const std::vector<int> targets{3, 17};
    CHECK(t.cross_entropy(t.constant(uniform), targets).value()(0, 0) ==
          doctest::Approx(std::log(18.0)).epsilon(1e-12));
    nn::Matrix peaked = nn::Matrix::Constant(1, 3, -800.0);
    peaked(0, 1) = 800.0;
    const std::vector<int> one{1};
    CHECK(t.cross_entropy(t.constant(peaked), one).value()(0, 0) == doctest::Approx(0.0));
    const std::vector<int> ignored{-1, -1};
    CHECK_THROWS(t.cross_entropy(t.constant(uniform), ignored));
  }

  TEST_CASE("dropout: identity at p=0, inverted scaling otherwise") {
    nn::Tape t;
    Rng rng(1);
    auto x = t.constant(nn::Matrix::Ones(50, 40));
    CHECK(t.dropout(x, 0.0, rng).value() == x.value());
    const nn::Matrix y = t.dropout(x, 0.25, rng).value();
    const double kept = (y.array() > 0).cast<double>().mean();
    CHECK(kept == doctest::Approx(0.75).epsilon(0.05));
    CHECK(y.maxCoeff() == doctest::Approx(1.0 / 0.75));
  }

  TEST_CASE("parameter gradients accumulate across backward calls") {
    auto w = rand_param("w", 2, 2, 10);
    w.zero_grad();
    for (int i = 0; i < 2; ++i) {
      nn::Tape t;
      Rng r(1);
      t.backward(random_projection(t, t.param(w), r));
    }
    nn::Matrix once = w.grad;
    w.zero_grad();
    {
      nn::Tape t;
      Rng r(1);
      t.backward(random_projection(t, t.param(w), r));
    }
    CHECK((once - 2.0 * w.grad).norm() < 1e-12);
  }

  TEST_CASE("shape mismatches throw") {
    nn::Tape t;
    auto a = t.constant(nn::Matrix::Ones(2, 3));
    CHECK_THROWS(t.matmul(a, a));
    CHECK_THROWS(t.add(a, t.constant(nn::Matrix::Ones(3, 2))));
    CHECK_THROWS(t.backward(a));
  }

  TEST_CASE("Adam minimizes a quadratic and clips the global norm") {
    nn::Parameter p = nn::constant_parameter("p", 1, 3, 5.0);
    nn::Adam::Options o;
    o.lr = 0.1;
    o.clip_norm = 1.0;
    nn::Adam adam({&p}, o);
    double first_norm = 0.0;
    for (int step = 0; step < 500; ++step) {
      adam.zero_grad();
      nn::Tape t;
      auto x = t.param(p);
      auto sq = t.matmul_nt(x, x);
      t.backward(sq);
      const double norm = adam.step();
      if (step == 0) first_norm = norm;
    }
    CHECK(first_norm == doctest::Approx(2.0 * std::sqrt(75.0)));
    CHECK(p.value.norm() < 1e-2);
  }

  TEST_CASE("Adam rejects non-finite gradients") {
    nn::Parameter p = nn::constant_parameter("p", 1, 1, 1.0);
    nn::Adam adam({&p}, {});
    adam.zero_grad();
    p.grad(0, 0) = std::nan("");
    CHECK_THROWS(adam.step());
  }
}
