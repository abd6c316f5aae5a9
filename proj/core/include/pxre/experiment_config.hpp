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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pxre/backbone.hpp"
#include "pxre/classify_head.hpp"
#include "pxre/model.hpp"

namespace pxre {

/// One fine-tuning experiment. Serialized as a flat UTF-8 `key = value`
/// file; '#' starts a comment, lists are comma separated, and relative
/// paths resolve against the file's directory.
struct ExperimentConfig {
  std::string template_name = "Prompt_3";
  HeadMode head_mode = HeadMode::kLinear;
  Pooling pooling = Pooling::kLastToken;
  std::string source_lang = "en";
  std::vector<std::string> target_langs;
  std::vector<std::string> languages{"en", "zh", "ar"};

  /// "toy" builds a fresh transformer from `toy`; anything else is a
  /// backbone checkpoint path.
  std::string backbone = "toy";
  BackboneConfig toy;

  double lr = 1e-3;
  int batch_size = 8;
  int max_epochs = 20;
  double weight_decay = 0.0;
  double clip_norm = 1.0;
  std::uint64_t seed = 1;
  /// Stops once the end-of-epoch train accuracy reaches this value.
  std::optional<double> target_train_accuracy;

  bool language_id_wrapping = true;
  LangIdPolicy eval_lang_id = LangIdPolicy::kData;

  std::string train_data;
  std::string dev_data;
  std::string test_data;
  /// Directory holding <lang>/test.jsonl or <lang>.jsonl per target.
  std::string target_data;
  /// Extra JSONL files whose tokens join a toy backbone's vocabulary.
  std::vector<std::string> vocab_files;
  std::string verbalizer;
  std::string model_name = "prompt";

  /// Throws ConfigError for unknown templates, unregistered languages and
  /// out-of-range numbers.
  void validate() const;

  /// Canonical text: every key in sorted order, one `key = value` per line.
  std::string to_text() const;

  /// First 16 hex digits of the SHA-256 of to_text().
  std::string fingerprint() const;
};

/// Throws ConfigError naming the line for unknown keys, duplicates and
/// malformed values. Relative paths resolve against base_dir.
ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::filesystem::path& base_dir = {});
/// Throws IoError naming the path when it cannot be read.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace pxre
