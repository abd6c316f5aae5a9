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

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pxre/experiment_config.hpp"
#include "pxre/metrics.hpp"
#include "pxre/model.hpp"
#include "pxre/noise.hpp"
#include "pxre/report.hpp"

namespace pxre {

struct TrainOptions {
  nn::Adam::Options adam;
  int batch_size = 8;
  int max_epochs = 20;
  std::uint64_t seed = 1;
  std::optional<double> target_train_accuracy;
  /// Keep a snapshot of every epoch rather than only the best so far.
  bool keep_all = false;

  static TrainOptions from(const ExperimentConfig& config);
};

struct Checkpoint {
  int epoch = 0;  // 0 = initialization
  double dev_loss = 0.0;
  double train_loss = 0.0;      // mean over the epoch's updates; 0 for epoch 0
  double train_accuracy = 0.0;  // eval-mode accuracy on the train set
  std::shared_ptr<const RelationModel> snapshot;  // null when not retained
};

struct CheckpointSet {
  std::vector<Checkpoint> checkpoints;
  /// Parameters after the last completed epoch.
  std::shared_ptr<const RelationModel> final_model;
};

/// Argmin dev loss, earliest epoch on ties. Throws ModelError when empty.
const Checkpoint& select_checkpoint(const CheckpointSet& set);
/// Index form used by select_checkpoint.
std::size_t select_index(std::span<const double> dev_losses);

/// Mean NLL of the gold labels in eval mode.
double dataset_loss(RelationModel& model, const Dataset& dataset);

/// Fine-tunes `model` with Adam over shuffled mini-batches and records a
/// checkpoint per epoch. Throws DataError on a label-space or language
/// mismatch, or an empty dev set, before any update; ModelError when a
/// loss turns non-finite.
CheckpointSet train(RelationModel model, const Dataset& train_set, const Dataset& dev_set,
                    const TrainOptions& options);
CheckpointSet train(const ExperimentConfig& config, const Dataset& train_set,
                    const Dataset& dev_set);

/// Predicted labels over unlabeled inputs; id tokens follow the model's
/// language-id policy.
std::vector<std::string> predict(RelationModel& model, std::span<const UnlabeledInstance> inputs);

/// Predicts stripped copies of the instances, then scores against golds.
EvalReport evaluate(RelationModel& model, const Dataset& dataset);

/// Evaluates on each target with the training template. Throws ConfigError
/// when `eval_template` differs structurally from the model's template.
std::vector<EvalReport> zero_shot_eval(RelationModel& model, const PromptTemplate& eval_template,
                                       std::span<const Dataset> targets);
std::vector<EvalReport> zero_shot_eval(const ExperimentConfig& config, RelationModel& model,
                                       std::span<const Dataset> targets);

/// Vocabulary for a fresh toy backbone: reserved tokens, then every token
/// of the given datasets, template literals and verbalizer words, in first
/// appearance order.
Vocab build_vocab(const LanguageRegistry& languages, std::span<const Dataset> datasets,
                  const PromptTemplate& tpl, const Verbalizer& verbalizer);

/// Backbone + fresh head for an experiment. Toy backbones take their
/// vocabulary from `vocab_sources` plus config.vocab_files.
RelationModel build_model(const ExperimentConfig& config, const LabelSpace& labels,
                          std::span<const Dataset> vocab_sources);

struct PretrainOptions {
  nn::Adam::Options adam;
  /// Optimizer steps; 0 means `epochs` full passes instead.
  int steps = 0;
  int epochs = 1;
  int batch_size = 8;
  std::uint64_t seed = 1;
  NoiseOptions noise;
};

/// Denoising pretraining over monolingual sentences. Batches are taken in
/// order from a corpus reshuffled on every pass; returns the loss of every
/// step.
std::vector<double> pretrain(Backbone& backbone, std::span<const MonolingualSentence> corpus,
                             const PretrainOptions& options);

/// <dir>/<lang>/test.jsonl, falling back to <dir>/<lang>.jsonl.
Dataset load_target_dataset(const std::filesystem::path& dir, const std::string& lang,
                            const LabelSpace& labels);

}  // namespace pxre
