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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pxre/relation_data.hpp"

namespace pxre {

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;    // gold count
  std::size_t predicted = 0;  // prediction count
  std::size_t true_positives = 0;

  bool operator==(const ClassMetrics&) const = default;
};

/// Single-label multiclass scores. micro-F1 pools TP/FP/FN over classes;
/// macro-F1 averages per-class F1 over classes that occur in the golds or
/// the predictions (a predicted class with no support contributes 0).
struct MetricBundle {
  double accuracy = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::size_t n = 0;
  std::vector<ClassMetrics> per_class;  // label-space order

  bool operator==(const MetricBundle&) const = default;
};

/// Throws DataError for empty or mismatched inputs and for labels outside
/// the label space.
MetricBundle metrics(std::span<const std::string> preds, std::span<const std::string> golds,
                     const LabelSpace& labels);
MetricBundle metrics(std::span<const std::size_t> preds, std::span<const std::size_t> golds,
                     const LabelSpace& labels);

}  // namespace pxre
