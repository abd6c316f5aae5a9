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
#include "pxre/experiment_config.hpp"
#include "support/files.hpp"

using namespace pxre;

TEST_SUITE("experiment_config") {
  TEST_CASE("defaults validate and fingerprint stably") {
    const ExperimentConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.fingerprint().size() == 16);
    CHECK(c.fingerprint() == ExperimentConfig{}.fingerprint());
    ExperimentConfig d;
    d.lr = 2e-3;
    CHECK(d.fingerprint() != c.fingerprint());
  }

  TEST_CASE("parsing reads keys, comments and relative paths") {
    const auto c = parse_experiment_config(
        "# toy run\n"
        "template = Prompt_4\n"
        "head_mode = verbalizer\n"
        "pooling = mask_position\n"
        "target_langs = zh, ar\n"
        "lr = 0.003   # faster\n"
        "seed = 7\n"
        "d_model = 16\n"
        "target_train_accuracy = none\n"
        "train_data = data/train.jsonl\n",
        "/base");
    CHECK(c.template_name == "Prompt_4");
    CHECK(c.head_mode == HeadMode::kVerbalizer);
    CHECK(c.pooling == Pooling::kMaskPosition);
    CHECK(c.target_langs == std::vector<std::string>{"zh", "ar"});
    CHECK(c.lr == 0.003);
    CHECK(c.seed == 7);
    CHECK(c.toy.seed == 7);
    CHECK(c.toy.d_model == 16);
    CHECK_FALSE(c.target_train_accuracy.has_value());
    CHECK(c.train_data == "/base/data/train.jsonl");
  }

  TEST_CASE("canonical text re-parses to the same fingerprint") {
    ExperimentConfig c;
    c.template_name = "Prompt_7";
    c.target_langs = {"zh"};
    c.target_train_accuracy = 0.9;
    c.toy.d_model = 16;
    c.toy.n_heads = 2;
    const auto back = parse_experiment_config(c.to_text());
    CHECK(back.to_text() == c.to_text());
    CHECK(back.fingerprint() == c.fingerprint());
  }

  TEST_CASE("bad input names the offending line") {
    CHECK_THROWS_WITH_AS(parse_experiment_config("lr = 1e-3\nbogus = 1\n"),
                         doctest::Contains("line 2"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("lr = 1\nlr = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("no equals sign\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("template = Prompt_42\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("target_langs = fr\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("lr = fast\n"), ConfigError);
    CHECK_THROWS_WITH_AS(load_experiment_config("/nonexistent/x.cfg"),
                         "cannot read config '/nonexistent/x.cfg'", IoError);
  }

  TEST_CASE("files resolve paths against their own directory") {
    pxre::testing::TempDir dir;
    pxre::testing::write_file(dir / "run.cfg", "dev_data = dev.jsonl\n");
    const auto c = load_experiment_config(dir / "run.cfg");
    CHECK(c.dev_data == (dir / "dev.jsonl").string());
  }
}
