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

#include "pxre/train_eval.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "pxre/checkpoint.hpp"
#include "pxre/error.hpp"
#include "pxre/logging.hpp"
#include "pxre/rng.hpp"

namespace pxre {
namespace {

struct Score {
  double loss = 0.0;
  double accuracy = 0.0;
};

Score score(RelationModel& model, const Dataset& dataset) {
  double nll = 0.0;
  std::size_t correct = 0;
  for (const auto& inst : dataset.instances) {
    const auto gold = model.spec().labels.index_of(inst.label);
    const auto dist =
        model.distribution(UnlabeledInstance::from(inst), model.id_lang_for(inst.lang));
    nll -= std::log(dist[gold]);
    if (argmax(dist) == gold) ++correct;
  }
  const double n = static_cast<double>(dataset.size());
  return {nll / n, static_cast<double>(correct) / n};
}

void check_split(const RelationModel& model, const Dataset& data, const char* role) {
  if (!(data.label_space == model.spec().labels)) {
    throw DataError(std::string("label-space mismatch: ") + role +
                    " set labels differ from the model's label space");
  }
  if (data.lang != model.spec().source_lang) {
    throw DataError(std::string(role) + " set language '" + data.lang +
                    "' differs from source language '" + model.spec().source_lang + "'");
  }
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace

TrainOptions TrainOptions::from(const ExperimentConfig& config) {
  TrainOptions o;
  o.adam.lr = config.lr;
  o.adam.weight_decay = config.weight_decay;
  o.adam.clip_norm = config.clip_norm;
  o.batch_size = config.batch_size;
  o.max_epochs = config.max_epochs;
  o.seed = config.seed;
  o.target_train_accuracy = config.target_train_accuracy;
  return o;
}

std::size_t select_index(std::span<const double> dev_losses) {
  if (dev_losses.empty()) throw ModelError("no checkpoints to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < dev_losses.size(); ++i) {
    if (dev_losses[i] < dev_losses[best]) best = i;
  }
  return best;
}

const Checkpoint& select_checkpoint(const CheckpointSet& set) {
  std::vector<double> losses;
  losses.reserve(set.checkpoints.size());
  for (const auto& c : set.checkpoints) losses.push_back(c.dev_loss);
  return set.checkpoints[select_index(losses)];
}

double dataset_loss(RelationModel& model, const Dataset& dataset) {
  if (dataset.empty()) throw DataError("empty evaluation set");
  return score(model, dataset).loss;
}

CheckpointSet train(RelationModel model, const Dataset& train_set, const Dataset& dev_set,
                    const TrainOptions& options) {
  if (dev_set.empty()) throw DataError("dev set required for checkpoint selection");
  if (train_set.empty()) throw DataError("empty training set");
  check_split(model, train_set, "train");
  check_split(model, dev_set, "dev");
  if (options.batch_size < 1) throw ConfigError("batch_size must be at least 1");

  CheckpointSet out;
  double best_dev = 0.0;
  auto record = [&](Checkpoint c) {
    const bool best = out.checkpoints.empty() || c.dev_loss < best_dev;
    if (best) best_dev = c.dev_loss;
    if (best || options.keep_all) c.snapshot = std::make_shared<const RelationModel>(model);
    if (best && !options.keep_all) {
      for (auto& prev : out.checkpoints) prev.snapshot.reset();
    }
    out.checkpoints.push_back(std::move(c));
  };

  const Score init = score(model, dev_set);
  record({0, init.loss, 0.0, score(model, train_set).accuracy, nullptr});

  Rng rng(options.seed);
  Rng dropout_rng(rng.fork());
  nn::Adam adam(model.parameters(), options.adam);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(options.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(options.batch_size));
      nn::Tape tape;
      std::vector<nn::Var> losses;
      for (std::size_t k = start; k < stop; ++k) {
        losses.push_back(model.loss(tape, train_set.instances[order[k]], ForwardMode::kTrain,
                                    &dropout_rng));
      }
      const std::vector<double> weights(losses.size(), 1.0 / static_cast<double>(losses.size()));
      const nn::Var loss = tape.weighted_sum(losses, weights);
      const double value = loss.value()(0, 0);
      if (!std::isfinite(value)) {
        std::string ids;
        for (std::size_t k = start; k < stop; ++k) {
          ids += (ids.empty() ? "" : ",") + train_set.instances[order[k]].id;
        }
        throw ModelError("non-finite training loss at epoch " + std::to_string(epoch) +
                         ", batch " + std::to_string(batches + 1) + " (instances " + ids + ")");
      }
      adam.zero_grad();
      tape.backward(loss);
      adam.step();
      loss_sum += value;
      ++batches;
    }
    const Score dev = score(model, dev_set);
    const double train_acc = score(model, train_set).accuracy;
    const double train_loss = loss_sum / batches;
    log::info("epoch", {{"epoch", std::to_string(epoch)},
                        {"train_loss", fmt(train_loss)},
                        {"train_accuracy", fmt(train_acc)},
                        {"dev_loss", fmt(dev.loss)}});
    record({epoch, dev.loss, train_loss, train_acc, nullptr});
    if (options.target_train_accuracy && train_acc >= *options.target_train_accuracy) break;
  }
  out.final_model = std::make_shared<const RelationModel>(std::move(model));
  return out;
}

CheckpointSet train(const ExperimentConfig& config, const Dataset& train_set,
                    const Dataset& dev_set) {
  config.validate();
  if (dev_set.empty()) throw DataError("dev set required for checkpoint selection");
  const Dataset sources[] = {train_set, dev_set};
  return train(build_model(config, train_set.label_space, sources), train_set, dev_set,
               TrainOptions::from(config));
}

std::vector<std::string> predict(RelationModel& model, std::span<const UnlabeledInstance> inputs) {
  std::vector<std::string> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) {
    const auto dist = model.distribution(in, model.id_lang_for(in.lang));
    out.push_back(model.spec().labels.at(argmax(dist)));
  }
  return out;
}

EvalReport evaluate(RelationModel& model, const Dataset& dataset) {
  if (dataset.empty()) throw DataError("empty evaluation set");
  if (!(dataset.label_space == model.spec().labels)) {
    throw DataError("label-space mismatch: evaluation set '" + dataset.name +
                    "' labels differ from the model's label space");
  }
  const auto& languages = model.backbone().vocab().languages();
  const std::string id_lang = model.id_lang_for(dataset.lang);
  if (!languages.contains(id_lang)) {
    throw ConfigError("language '" + id_lang + "' has no id token (registered: " +
                      languages.listing() + ")");
  }
  // Predictions see only stripped inputs; golds are read afterwards.
  const auto preds = predict(model, strip_labels(dataset));
  std::vector<std::string> golds;
  golds.reserve(dataset.size());
  for (const auto& inst : dataset.instances) golds.push_back(inst.label);

  EvalReport report = EvalReport::from_metrics({model.spec().source_lang, dataset.lang},
                                               metrics(preds, golds, model.spec().labels));
  report.model_name = model.spec().model_name;
  report.template_name = model.spec().prompt.name;
  report.config_fingerprint = model.spec().config_fingerprint;
  return report;
}

std::vector<EvalReport> zero_shot_eval(RelationModel& model, const PromptTemplate& eval_template,
                                       std::span<const Dataset> targets) {
  if (!eval_template.same_structure(model.spec().prompt)) {
    throw ConfigError("template mismatch: model was trained with '" + model.spec().prompt.name +
                      "' but evaluation requests '" + eval_template.name + "'");
  }
  std::vector<EvalReport> out;
  for (const auto& t : targets) out.push_back(evaluate(model, t));
  return out;
}

std::vector<EvalReport> zero_shot_eval(const ExperimentConfig& config, RelationModel& model,
                                       std::span<const Dataset> targets) {
  return zero_shot_eval(model, resolve_template(config.template_name), targets);
}

Vocab build_vocab(const LanguageRegistry& languages, std::span<const Dataset> datasets,
                  const PromptTemplate& tpl, const Verbalizer& verbalizer) {
  Vocab vocab(languages);
  for (const auto& d : datasets) {
    for (const auto& inst : d.instances) vocab.add_all(inst.tokens);
  }
  for (const auto* side : {&tpl.enc, &tpl.dec}) {
    for (const auto& slot : *side) {
      if (slot.kind == SlotKind::kLiteral) vocab.add(slot.text);
    }
  }
  for (const auto& [label, word] : verbalizer.mapping()) vocab.add(word);
  return vocab;
}

RelationModel build_model(const ExperimentConfig& config, const LabelSpace& labels,
                          std::span<const Dataset> vocab_sources) {
  config.validate();
  ModelSpec spec;
  spec.prompt = resolve_template(config.template_name);
  spec.head_mode = config.head_mode;
  spec.pooling = config.pooling;
  spec.source_lang = config.source_lang;
  spec.language_id_wrapping = config.language_id_wrapping;
  spec.lang_id_policy = config.eval_lang_id;
  spec.labels = labels;
  spec.model_name = config.model_name;
  spec.config_fingerprint = config.fingerprint();
  spec.target_data = config.target_data;
  if (config.head_mode == HeadMode::kVerbalizer) {
    spec.verbalizer = config.verbalizer.empty() ? Verbalizer::identity(labels)
                                                : Verbalizer::load_tsv(config.verbalizer);
  }

  std::unique_ptr<Backbone> backbone;
  if (config.backbone == "toy") {
    std::vector<Dataset> sources(vocab_sources.begin(), vocab_sources.end());
    for (const auto& f : config.vocab_files) sources.push_back(load_jsonl(f));
    const LanguageRegistry languages(config.languages);
    backbone = std::make_unique<TransformerBackbone>(
        config.toy, build_vocab(languages, sources, spec.prompt, spec.verbalizer));
  } else {
    backbone = load_backbone(config.backbone);
  }
  Rng head_rng(config.seed);
  return RelationModel(std::move(backbone), std::move(spec), head_rng.fork());
}

std::vector<double> pretrain(Backbone& backbone, std::span<const MonolingualSentence> corpus,
                             const PretrainOptions& options) {
  if (corpus.empty()) throw DataError("empty pretraining corpus");
  if (options.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (options.steps < 0 || options.epochs < 0) {
    throw ConfigError("steps and epochs must be non-negative");
  }
  nn::Adam adam(backbone.parameters(), options.adam);
  Rng rng(options.seed);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = static_cast<std::size_t>(options.batch_size);
  const std::size_t per_pass = (order.size() + batch - 1) / batch;
  const std::size_t total = options.steps > 0 ? static_cast<std::size_t>(options.steps)
                                              : per_pass * static_cast<std::size_t>(options.epochs);
  std::vector<double> history;
  std::size_t cursor = order.size();
  for (std::size_t step = 0; step < total; ++step) {
    if (cursor >= order.size()) {
      rng.shuffle(order);
      cursor = 0;
    }
    std::vector<MonolingualSentence> items;
    for (; items.size() < batch && cursor < order.size(); ++cursor) {
      items.push_back(corpus[order[cursor]]);
    }
    history.push_back(denoising_step(backbone, adam, items, rng.next(), options.noise));
    if ((step + 1) % per_pass == 0 || step + 1 == total) {
      log::info("pretrain", {{"step", std::to_string(step + 1)}, {"loss", fmt(history.back())}});
    }
  }
  return history;
}

Dataset load_target_dataset(const std::filesystem::path& dir, const std::string& lang,
                            const LabelSpace& labels) {
  const auto nested = dir / lang / "test.jsonl";
  const auto flat = dir / (lang + ".jsonl");
  if (std::filesystem::exists(nested)) return load_jsonl(nested, labels);
  if (std::filesystem::exists(flat)) return load_jsonl(flat, labels);
  throw IoError("no target data for '" + lang + "': expected '" + nested.string() + "' or '" +
                flat.string() + "'");
}

}  // namespace pxre
