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

#include "pxre/metrics.hpp"

#include "pxre/error.hpp"

namespace pxre {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Harmonic mean of precision and recall from integer counts,
// 2 TP / (predicted + support), so the result is correctly rounded.
double f1_from_counts(std::size_t tp, std::size_t predicted, std::size_t support) {
  return ratio(2 * tp, predicted + support);
}

}  // namespace

MetricBundle metrics(std::span<const std::size_t> preds, std::span<const std::size_t> golds,
                     const LabelSpace& labels) {
  if (preds.size() != golds.size()) {
    throw DataError("metrics: " + std::to_string(preds.size()) + " predictions for " +
                    std::to_string(golds.size()) + " gold labels");
  }
  if (preds.empty()) throw DataError("metrics: empty input");
  const std::size_t k = labels.size();
  std::vector<std::size_t> tp(k, 0), predicted(k, 0), support(k, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= k || golds[i] >= k) throw DataError("metrics: label index out of range");
    ++predicted[preds[i]];
    ++support[golds[i]];
    if (preds[i] == golds[i]) {
      ++tp[preds[i]];
      ++correct;
    }
  }

  MetricBundle out;
  out.n = preds.size();
  out.accuracy = ratio(correct, out.n);
  std::size_t sum_tp = 0, sum_fp = 0, sum_fn = 0;
  double macro_sum = 0.0;
  std::size_t macro_count = 0;
  for (std::size_t c = 0; c < k; ++c) {
    ClassMetrics m;
    m.label = labels.at(c);
    m.support = support[c];
    m.predicted = predicted[c];
    m.true_positives = tp[c];
    m.precision = ratio(tp[c], predicted[c]);
    m.recall = ratio(tp[c], support[c]);
    m.f1 = f1_from_counts(tp[c], predicted[c], support[c]);
    sum_tp += tp[c];
    sum_fp += predicted[c] - tp[c];
    sum_fn += support[c] - tp[c];
    if (support[c] > 0 || predicted[c] > 0) {
      macro_sum += m.f1;
      ++macro_count;
    }
    out.per_class.push_back(std::move(m));
  }
  out.micro_precision = ratio(sum_tp, sum_tp + sum_fp);
  out.micro_recall = ratio(sum_tp, sum_tp + sum_fn);
  out.micro_f1 = f1_from_counts(sum_tp, sum_tp + sum_fp, sum_tp + sum_fn);
  out.macro_f1 = macro_count == 0 ? 0.0 : macro_sum / static_cast<double>(macro_count);
  return out;
}

MetricBundle metrics(std::span<const std::string> preds, std::span<const std::string> golds,
                     const LabelSpace& labels) {
  if (preds.size() != golds.size()) {
    throw DataError("metrics: " + std::to_string(preds.size()) + " predictions for " +
                    std::to_string(golds.size()) + " gold labels");
  }
  std::vector<std::size_t> p, g;
  p.reserve(preds.size());
  g.reserve(golds.size());
  for (const auto& s : preds) p.push_back(labels.index_of(s));
  for (const auto& s : golds) g.push_back(labels.index_of(s));
  return metrics(std::span<const std::size_t>(p), std::span<const std::size_t>(g), labels);
}

}  // namespace pxre
