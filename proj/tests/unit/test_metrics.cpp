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

#include "doctest.h"
#include "pxre/error.hpp"
#include "pxre/metrics.hpp"

using namespace pxre;

TEST_SUITE("metrics") {
  TEST_CASE("worked two-class example") {
    const LabelSpace labels({"A", "B"});
    const std::vector<std::string> golds{"A", "A", "B", "B"};
    const std::vector<std::string> preds{"A", "B", "B", "B"};
    const auto m = metrics(preds, golds, labels);
    CHECK(m.n == 4);
    CHECK(m.accuracy == doctest::Approx(0.75));
    CHECK(m.micro_f1 == doctest::Approx(0.75));
    REQUIRE(m.per_class.size() == 2);
    CHECK(m.per_class[0].precision == doctest::Approx(1.0));
    CHECK(m.per_class[0].recall == doctest::Approx(0.5));
    CHECK(m.per_class[0].f1 == doctest::Approx(2.0 / 3.0));
    CHECK(m.per_class[1].precision == doctest::Approx(2.0 / 3.0));
    CHECK(m.per_class[1].recall == doctest::Approx(1.0));
    CHECK(m.per_class[1].f1 == doctest::Approx(0.8));
    CHECK(m.macro_f1 == doctest::Approx((2.0 / 3.0 + 0.8) / 2.0));
    CHECK(m.per_class[1].support == 2);
    CHECK(m.per_class[1].predicted == 3);
    CHECK(m.per_class[1].true_positives == 2);
  }

  TEST_CASE("classes absent from golds and predictions do not enter macro-F1") {
    const LabelSpace labels({"A", "B", "C"});
    const std::vector<std::string> golds{"A", "B"};
    const std::vector<std::string> perfect{"A", "B"};
    CHECK(metrics(perfect, golds, labels).macro_f1 == doctest::Approx(1.0));
    const std::vector<std::string> stray{"A", "C"};
    const auto m = metrics(stray, golds, labels);
    CHECK(m.macro_f1 == doctest::Approx(1.0 / 3.0));  // A=1, B=0, C=0
    CHECK(m.per_class[2].precision == 0.0);
  }

  TEST_CASE("index and string overloads agree") {
    const LabelSpace labels({"x", "y", "z"});
    const std::vector<std::size_t> pi{0, 2, 2, 1, 0};
    const std::vector<std::size_t> gi{0, 1, 2, 1, 2};
    std::vector<std::string> ps, gs;
    for (auto i : pi) ps.push_back(labels.at(i));
    for (auto i : gi) gs.push_back(labels.at(i));
    CHECK(metrics(pi, gi, labels) == metrics(ps, gs, labels));
  }

  TEST_CASE("invalid inputs throw") {
    const LabelSpace labels({"A"});
    const std::vector<std::string> empty;
    const std::vector<std::string> one{"A"};
    const std::vector<std::string> two{"A", "A"};
    const std::vector<std::string> unknown{"Q"};
    CHECK_THROWS_AS(metrics(empty, empty, labels), DataError);
    CHECK_THROWS_AS(metrics(one, two, labels), DataError);
    CHECK_THROWS_AS(metrics(unknown, one, labels), DataError);
  }
}
