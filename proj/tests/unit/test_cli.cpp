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

#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "pxre/error.hpp"
#include "pxre/relation_data.hpp"
#include "pxre/report.hpp"
#include "pxre_cli/cli.hpp"
#include "support/files.hpp"
#include "support/synthetic.hpp"

using namespace pxre;
namespace pt = pxre::testing;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

// Writes a tiny en train/dev/test set, zh and ar targets and a config.
fs::path write_workspace(const pt::TempDir& dir) {
  write_jsonl(dir / "train.jsonl", pt::transfer_set("en", "a", 24, 1, false, Split::kTrain));
  write_jsonl(dir / "dev.jsonl", pt::transfer_set("en", "a", 8, 2, false, Split::kDev));
  write_jsonl(dir / "test.jsonl", pt::transfer_set("en", "a", 8, 3));
  fs::create_directories(dir / "targets");
  write_jsonl(dir / "targets" / "zh.jsonl", pt::transfer_set("zh", "b", 8, 4));
  write_jsonl(dir / "targets" / "ar.jsonl", pt::transfer_set("ar", "c", 8, 5));
  pt::write_file(dir / "run.cfg",
                 "template = Prompt_3\n"
                 "target_langs = zh, ar\n"
                 "d_model = 8\nn_heads = 2\nn_layers_enc = 1\nn_layers_dec = 1\nffn_width = 16\n"
                 "max_len = 48\nmax_epochs = 1\nbatch_size = 8\nseed = 3\n"
                 "train_data = train.jsonl\ndev_data = dev.jsonl\ntest_data = test.jsonl\n"
                 "target_data = targets\n"
                 "vocab_files = targets/zh.jsonl, targets/ar.jsonl\n");
  return dir / "run.cfg";
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 2 and domain errors exit 1") {
    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"frobnicate"}).code == cli::kExitUsage);
    CHECK(run({"render", "--template", "Prompt_1"}).code == cli::kExitUsage);
    const auto missing = run({"train", "--config", "/nonexistent/run.cfg"});
    CHECK(missing.code == cli::kExitDomain);
    CHECK(missing.err.find("cannot read config '/nonexistent/run.cfg'") != std::string::npos);
    CHECK(run({"--help"}).code == cli::kExitOk);
  }

  TEST_CASE("render writes one JSON line per instance") {
    pt::TempDir dir;
    const auto r = run({"render", "--template", "Prompt_3", "--data",
                        (pt::data_dir() / "fixture_en.jsonl").string(), "--out", dir.path().string(),
                        "--lang-id"});
    REQUIRE(r.code == 0);
    const auto text = pt::read_file(dir / "rendered.jsonl");
    CHECK(text.find("\"enc\":\"<s> Steve Jobs founded Apple in Cupertino . [MASK] Steve Jobs "
                    "[MASK] Apple </s> [EN]\"") != std::string::npos);
    CHECK(fs::exists(dir / cli::kManifestFile));
  }

  TEST_CASE("validate reports violations with exit 1") {
    pt::TempDir dir;
    pt::write_file(dir / "bad.jsonl",
                   "{\"id\":\"x\",\"lang\":\"en\",\"tokens\":[\"a\",\"b\"],\"subj_span\":[0,1],"
                   "\"obj_span\":[1,5],\"label\":\"r\"}\n");
    const auto bad = run({"validate", "--data", (dir / "bad.jsonl").string()});
    CHECK(bad.code == cli::kExitDomain);
    CHECK(bad.err.find("span out of bounds") != std::string::npos);
    CHECK(run({"validate", "--data", (pt::data_dir() / "fixture_en.jsonl").string()}).code == 0);
  }

  TEST_CASE("train then zeroshot yields one report per target and a replayable manifest") {
    pt::TempDir dir;
    const auto cfg = write_workspace(dir);
    const auto train_out = dir / "train";
    const auto t = run({"train", "--config", cfg.string(), "--out", train_out.string()});
    INFO(t.err);
    REQUIRE(t.code == 0);
    CHECK(fs::exists(train_out / "model.ckpt"));
    CHECK(fs::exists(train_out / "report_en-en.json"));
    CHECK(fs::exists(train_out / "report_en-zh.json"));
    CHECK(fs::exists(train_out / "table.md"));

    const auto zs_out = dir / "zs";
    const auto z = run({"zeroshot", "--model", (train_out / "model.ckpt").string(), "--targets",
                        "zh,ar", "--out", zs_out.string()});
    INFO(z.err);
    REQUIRE(z.code == 0);
    const auto reports = read_reports(zs_out);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].direction.label() == "En-Ar");
    CHECK(reports[1].direction.label() == "En-Zh");
    CHECK(read_report(zs_out / "report_en-zh.json") == read_report(train_out / "report_en-zh.json"));

    const auto manifest = cli::read_manifest(train_out / cli::kManifestFile);
    CHECK(manifest.subcommand == "train");
    CHECK(manifest.seed == 3);
    CHECK_FALSE(manifest.inputs.empty());
    const auto replay = run(manifest.command);
    REQUIRE(replay.code == 0);
    const auto again = cli::read_manifest(train_out / cli::kManifestFile);
    REQUIRE(again.artifacts.size() == manifest.artifacts.size());
    for (std::size_t i = 0; i < again.artifacts.size(); ++i) {
      INFO(again.artifacts[i].path);
      CHECK(again.artifacts[i].sha256 == manifest.artifacts[i].sha256);
    }

    const auto rep = run({"report", "--in", zs_out.string(), "--format", "md"});
    REQUIRE(rep.code == 0);
    CHECK(rep.out.find("| Model | En-Ar | En-Zh | Avg. |") != std::string::npos);
  }

  TEST_CASE("checkpoint references fall back to the cache directory") {
    pt::TempDir dir;
    pt::write_file(dir / "m.ckpt", "x");
    ::setenv("PXRE_CACHE", dir.path().c_str(), 1);
    CHECK(cli::resolve_checkpoint("m.ckpt") == dir / "m.ckpt");
    CHECK_THROWS_AS(cli::resolve_checkpoint("absent.ckpt"), IoError);
    ::unsetenv("PXRE_CACHE");
  }

  TEST_CASE("build-dataset writes splits and a build report") {
    pt::TempDir dir;
    const auto conllu = pt::data_dir() / "conllu";
    const auto r = run({"build-dataset", "--conllu", (conllu / "fixture10.conllu").string(),
                        "--target", (conllu / "fixture10.zh.txt").string(), "--out",
                        dir.path().string(), "--k", "2", "--ratios", "1", "0", "0"});
    INFO(r.err);
    REQUIRE(r.code == 0);
    CHECK(load_jsonl(dir / "train.jsonl").size() == 4);
    CHECK(fs::exists(dir / "build_report.json"));
  }
}
