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

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pxre/metrics.hpp"

namespace pxre {

inline constexpr std::string_view kEvalReportSchema = "pxre.eval_report/1";

struct Direction {
  std::string source;
  std::string target;

  /// "En-Zh" style column header.
  std::string label() const;
  bool operator==(const Direction&) const = default;
};

struct EvalReport {
  Direction direction;
  std::string model_name;
  std::string template_name;
  std::string config_fingerprint;
  std::size_t n_instances = 0;
  double accuracy = 0.0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::vector<ClassMetrics> per_class;

  static EvalReport from_metrics(Direction direction, const MetricBundle& m);
  bool operator==(const EvalReport&) const = default;
};

std::string to_json(const EvalReport& report);
EvalReport eval_report_from_json(std::string_view text);
void write_report(const std::filesystem::path& path, const EvalReport& report);
EvalReport read_report(const std::filesystem::path& path);
/// Every *.json report below a directory, sorted by path.
std::vector<EvalReport> read_reports(const std::filesystem::path& dir);

enum class ReportMetric { kMicroF1, kMacroF1, kAccuracy };
enum class ReportFormat { kMarkdown, kJson };

ReportFormat parse_report_format(std::string_view text);
ReportMetric parse_report_metric(std::string_view text);

struct ReportOptions {
  ReportMetric metric = ReportMetric::kMicroF1;
  /// Averages printed by an external source, per model row. When a
  /// recomputed average differs by more than `tolerance` points, the
  /// markdown footer notes the discrepancy.
  std::map<std::string, double> reference_avg;
  double tolerance = 0.05;
};

/// Models x directions table of scores in percent with an unweighted Avg.
/// column over the directions each model has.
struct ReportTable {
  std::vector<std::string> models;
  std::vector<Direction> directions;
  std::map<std::string, std::map<std::string, double>> cells;  // model -> direction label -> %
  std::map<std::string, double> averages;
  std::vector<std::string> footnotes;
};

ReportTable build_table(std::span<const EvalReport> reports, const ReportOptions& options = {});

/// Markdown table (with footnotes), or a JSON document containing the
/// table and every report. Throws DataError when reports is empty.
std::string emit_report(std::span<const EvalReport> reports, ReportFormat format,
                        const ReportOptions& options = {});

/// Reports embedded in a JSON document produced by emit_report.
std::vector<EvalReport> reports_from_json(std::string_view text);

/// Split-count table in the layout of a dataset statistics table.
std::string emit_split_table(const std::map<SplitKey, std::size_t>& counts);

}  // namespace pxre
