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

#include <fstream>

#include "doctest.h"
#include "pxre/checkpoint.hpp"
#include "pxre/error.hpp"
#include "pxre/train_eval.hpp"
#include "support/files.hpp"
#include "support/synthetic.hpp"
#include "support/wrapped_backbone.hpp"

using namespace pxre;
using pxre::testing::TempDir;

namespace {

RelationModel small_model(const Dataset& ds) {
  auto cfg = pxre::testing::toy_config();
  cfg.target_data = "/data/targets";
  const std::vector<Dataset> sources{ds};
  return build_model(cfg, ds.label_space, sources);
}

}  // namespace

TEST_SUITE("model_checkpoint") {
  TEST_CASE("relation model round-trips bit-exactly") {
    const auto ds = pxre::testing::overfit_set(12, 3);
    auto model = small_model(ds);
    TempDir dir;
    save_model(dir / "m.ckpt", model);
    CHECK(checkpoint_kind(dir / "m.ckpt") == "relation_model");
    auto back = load_model(dir / "m.ckpt");
    CHECK(back.spec().prompt.name == "Prompt_3");
    CHECK(back.spec().labels == ds.label_space);
    CHECK(back.spec().target_data == "/data/targets");
    CHECK(back.spec().config_fingerprint == model.spec().config_fingerprint);
    CHECK(back.backbone().vocab().tokens() == model.backbone().vocab().tokens());
    for (const auto& inst : strip_labels(ds)) {
      CHECK(back.distribution(inst, "en") == model.distribution(inst, "en"));
    }
  }

  TEST_CASE("copies are independent") {
    const auto ds = pxre::testing::overfit_set(4, 3);
    auto model = small_model(ds);
    RelationModel copy = model;
    copy.head().bias.value.setConstant(5.0);
    CHECK(model.head().bias.value.norm() != doctest::Approx(copy.head().bias.value.norm()));
  }

  TEST_CASE("bare backbones load but are not relation models") {
    TransformerBackbone bb(BackboneConfig{}, Vocab{});
    TempDir dir;
    save_backbone(dir / "b.ckpt", bb);
    CHECK(checkpoint_kind(dir / "b.ckpt") == "backbone");
    const auto loaded = load_backbone(dir / "b.ckpt");
    CHECK(loaded->kind() == "transformer");
    CHECK(loaded->parameter_count() == bb.parameter_count());
    CHECK_THROWS_AS(load_model(dir / "b.ckpt"), ModelError);
  }

  TEST_CASE("malformed containers are rejected") {
    TempDir dir;
    pxre::testing::write_file(dir / "junk.ckpt", "NOTACKPT-and-more-bytes");
    CHECK_THROWS_AS(checkpoint_kind(dir / "junk.ckpt"), ModelError);
    CHECK_THROWS_AS(load_backbone(dir / "missing.ckpt"), IoError);

    TransformerBackbone bb(BackboneConfig{}, Vocab{});
    save_backbone(dir / "b.ckpt", bb);
    auto bytes = pxre::testing::read_file(dir / "b.ckpt");
    auto bumped = bytes;
    bumped[8] = 9;  // container version
    pxre::testing::write_file(dir / "v.ckpt", bumped);
    CHECK_THROWS_AS(load_backbone(dir / "v.ckpt"), ModelError);
    pxre::testing::write_file(dir / "t.ckpt", bytes.substr(0, bytes.size() - 16));
    CHECK_THROWS_AS(load_backbone(dir / "t.ckpt"), ModelError);
  }

  TEST_CASE("external backbone kinds load through the registry") {
    BackboneConfig cfg;
    cfg.d_model = 8;
    cfg.n_heads = 2;
    cfg.ffn_width = 16;
    pxre::testing::WrappedBackbone wrapped(TransformerBackbone(cfg, Vocab{}));
    TempDir dir;
    save_backbone(dir / "w.ckpt", wrapped);
    const auto orig = dir / "w.ckpt";
    pxre::testing::register_wrapped_backbone();
    const auto loaded = load_backbone(orig);
    CHECK(loaded->kind() == "wrapped");
    const std::vector<int> enc{1, 5, 2}, dec{1, 6};
    CHECK(forward(*loaded, enc, dec).v_dec == forward(wrapped, enc, dec).v_dec);
  }
}
