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

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "pxre/backbone.hpp"
#include "pxre/classify_head.hpp"
#include "pxre/metrics.hpp"
#include "pxre/noise.hpp"
#include "pxre/prompt_templates.hpp"
#include "pxre/vocab.hpp"

namespace {

using namespace pxre;

Vocab bench_vocab(int words) {
  Vocab v;
  for (int i = 0; i < words; ++i) v.add("w" + std::to_string(i));
  return v;
}

std::vector<int> ids(const Vocab& v, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(v.num_reserved() +
                  static_cast<int>(rng.below(static_cast<std::uint64_t>(v.size() - v.num_reserved()))));
  }
  return out;
}

void BM_BackboneForward(benchmark::State& state) {
  const int len = static_cast<int>(state.range(0));
  TransformerBackbone model(BackboneConfig{}, bench_vocab(200));
  const auto enc = ids(model.vocab(), len, 1);
  const auto dec = ids(model.vocab(), len / 2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(forward(model, enc, dec));
  state.SetItemsProcessed(state.iterations() * len);
}
BENCHMARK(BM_BackboneForward)->Arg(16)->Arg(64)->Arg(128);

void BM_BackboneForwardBackward(benchmark::State& state) {
  const int len = static_cast<int>(state.range(0));
  TransformerBackbone model(BackboneConfig{}, bench_vocab(200));
  const auto enc = ids(model.vocab(), len, 1);
  const auto dec = ids(model.vocab(), len / 2, 2);
  for (auto _ : state) {
    nn::Tape tape;
    auto g = model.forward(tape, enc, dec, ForwardMode::kEval, nullptr);
    auto loss = tape.cross_entropy(model.vocab_logits(tape, g.v_dec), dec);
    tape.backward(loss);
  }
}
BENCHMARK(BM_BackboneForwardBackward)->Arg(16)->Arg(64);

void BM_ApplyNoise(benchmark::State& state) {
  std::vector<std::string> tokens;
  for (int i = 0; i < state.range(0); ++i) tokens.push_back(i % 20 == 19 ? "." : "w" + std::to_string(i));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(apply_noise(tokens, seed++));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ApplyNoise)->Arg(64)->Arg(1024);

void BM_RenderEncode(benchmark::State& state) {
  const RelationInstance inst{"b", "en", {"Steve", "Jobs", "founded", "Apple", "in", "Cupertino", "."},
                              {0, 2}, {3, 4}, "org:founded_by", false};
  Vocab vocab;
  vocab.add_all(inst.tokens);
  const auto& tpl = builtin_templates().get("Prompt_7");
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode_pair(vocab, wrap_language_ids(render(tpl, inst), "en"), 128));
  }
}
BENCHMARK(BM_RenderEncode);

void BM_Metrics(benchmark::State& state) {
  std::vector<std::string> names;
  for (int i = 0; i < 18; ++i) names.push_back("r" + std::to_string(i));
  const LabelSpace labels(names);
  Rng rng(3);
  std::vector<std::size_t> preds, golds;
  for (int i = 0; i < state.range(0); ++i) {
    preds.push_back(rng.below(18));
    golds.push_back(rng.below(18));
  }
  for (auto _ : state) benchmark::DoNotOptimize(metrics(preds, golds, labels));
}
BENCHMARK(BM_Metrics)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
