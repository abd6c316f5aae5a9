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

#include "pxre/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pxre/error.hpp"

namespace pxre {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string capitalized(std::string code) {
  if (!code.empty()) code[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(code[0])));
  return code;
}

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

ordered_json report_json(const EvalReport& r) {
  ordered_json j;
  j["schema"] = kEvalReportSchema;
  j["direction"] = {{"source", r.direction.source}, {"target", r.direction.target}};
  j["model_name"] = r.model_name;
  j["template"] = r.template_name;
  j["config_fingerprint"] = r.config_fingerprint;
  j["n_instances"] = r.n_instances;
  j["accuracy"] = r.accuracy;
  j["micro_f1"] = r.micro_f1;
  j["macro_f1"] = r.macro_f1;
  ordered_json classes = ordered_json::array();
  for (const auto& c : r.per_class) {
    classes.push_back({{"label", c.label},
                       {"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1},
                       {"support", c.support},
                       {"predicted", c.predicted},
                       {"true_positives", c.true_positives}});
  }
  j["per_class"] = std::move(classes);
  return j;
}

EvalReport report_from(const json& j) {
  if (j.value("schema", std::string()) != kEvalReportSchema) {
    throw DataError("unsupported report schema '" + j.value("schema", std::string()) + "'");
  }
  EvalReport r;
  r.direction = {j.at("direction").at("source").get<std::string>(),
                 j.at("direction").at("target").get<std::string>()};
  r.model_name = j.at("model_name").get<std::string>();
  r.template_name = j.at("template").get<std::string>();
  r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  r.n_instances = j.at("n_instances").get<std::size_t>();
  r.accuracy = j.at("accuracy").get<double>();
  r.micro_f1 = j.at("micro_f1").get<double>();
  r.macro_f1 = j.at("macro_f1").get<double>();
  for (const auto& c : j.at("per_class")) {
    ClassMetrics m;
    m.label = c.at("label").get<std::string>();
    m.precision = c.at("precision").get<double>();
    m.recall = c.at("recall").get<double>();
    m.f1 = c.at("f1").get<double>();
    m.support = c.at("support").get<std::size_t>();
    m.predicted = c.at("predicted").get<std::size_t>();
    m.true_positives = c.at("true_positives").get<std::size_t>();
    r.per_class.push_back(std::move(m));
  }
  return r;
}

double metric_of(const EvalReport& r, ReportMetric metric) {
  switch (metric) {
    case ReportMetric::kMicroF1: return r.micro_f1;
    case ReportMetric::kMacroF1: return r.macro_f1;
    case ReportMetric::kAccuracy: return r.accuracy;
  }
  return r.micro_f1;
}

const char* metric_name(ReportMetric metric) {
  switch (metric) {
    case ReportMetric::kMicroF1: return "micro-F1";
    case ReportMetric::kMacroF1: return "macro-F1";
    case ReportMetric::kAccuracy: return "accuracy";
  }
  return "micro-F1";
}

}  // namespace

std::string Direction::label() const { return capitalized(source) + "-" + capitalized(target); }

EvalReport EvalReport::from_metrics(Direction direction, const MetricBundle& m) {
  EvalReport r;
  r.direction = std::move(direction);
  r.n_instances = m.n;
  r.accuracy = m.accuracy;
  r.micro_f1 = m.micro_f1;
  r.macro_f1 = m.macro_f1;
  r.per_class = m.per_class;
  return r;
}

std::string to_json(const EvalReport& report) { return report_json(report).dump(2); }

EvalReport eval_report_from_json(std::string_view text) {
  try {
    return report_from(json::parse(text));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed eval report: ") + e.what());
  }
}

void write_report(const std::filesystem::path& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << to_json(report) << '\n';
}

EvalReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return eval_report_from_json(buf.str());
}

std::vector<EvalReport> read_reports(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: '" + dir.string() + "'");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".json") continue;
    // Only files that carry the eval-report schema; manifests and build
    // reports share the directory.
    std::ifstream in(e.path());
    std::stringstream buf;
    buf << in.rdbuf();
    const auto j = json::parse(buf.str(), nullptr, false);
    if (!j.is_discarded() && j.is_object() && j.value("schema", std::string()) == kEvalReportSchema) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<EvalReport> out;
  for (const auto& f : files) out.push_back(read_report(f));
  return out;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "md" || text == "markdown") return ReportFormat::kMarkdown;
  if (text == "json") return ReportFormat::kJson;
  throw ConfigError("unknown report format '" + std::string(text) + "' (expected md, json)");
}

ReportMetric parse_report_metric(std::string_view text) {
  if (text == "micro_f1") return ReportMetric::kMicroF1;
  if (text == "macro_f1") return ReportMetric::kMacroF1;
  if (text == "accuracy") return ReportMetric::kAccuracy;
  throw ConfigError("unknown report metric '" + std::string(text) +
                    "' (expected micro_f1, macro_f1, accuracy)");
}

ReportTable build_table(std::span<const EvalReport> reports, const ReportOptions& options) {
  ReportTable table;
  std::set<std::string> seen_models;
  std::set<std::string> seen_dirs;
  for (const auto& r : reports) {
    if (seen_models.insert(r.model_name).second) table.models.push_back(r.model_name);
    if (seen_dirs.insert(r.direction.label()).second) table.directions.push_back(r.direction);
    table.cells[r.model_name][r.direction.label()] = 100.0 * metric_of(r, options.metric);
  }
  for (const auto& model : table.models) {
    const auto& row = table.cells[model];
    double sum = 0.0;
    for (const auto& [dir, value] : row) sum += value;
    const double avg = sum / static_cast<double>(row.size());
    table.averages[model] = avg;
    if (auto it = options.reference_avg.find(model); it != options.reference_avg.end()) {
      if (std::abs(avg - it->second) > options.tolerance) {
        table.footnotes.push_back("Avg. for " + model + " recomputed as " + fixed(avg, 2) +
                                  " over " + std::to_string(row.size()) +
                                  " directions; the reference table prints " +
                                  fixed(it->second, 1) + ".");
      }
    }
  }
  return table;
}

std::string emit_report(std::span<const EvalReport> reports, ReportFormat format,
                        const ReportOptions& options) {
  if (reports.empty()) throw DataError("emit_report: no reports");
  const ReportTable table = build_table(reports, options);

  if (format == ReportFormat::kJson) {
    ordered_json j;
    j["schema"] = "pxre.report_table/1";
    j["metric"] = metric_name(options.metric);
    ordered_json dirs = ordered_json::array();
    for (const auto& d : table.directions) dirs.push_back(d.label());
    j["directions"] = std::move(dirs);
    ordered_json rows = ordered_json::array();
    for (const auto& model : table.models) {
      ordered_json row;
      row["model"] = model;
      ordered_json cells = ordered_json::object();
      for (const auto& d : table.directions) {
        auto it = table.cells.at(model).find(d.label());
        cells[d.label()] = it == table.cells.at(model).end() ? ordered_json() : ordered_json(it->second);
      }
      row["cells"] = std::move(cells);
      row["avg"] = table.averages.at(model);
      rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    j["footnotes"] = table.footnotes;
    ordered_json all = ordered_json::array();
    for (const auto& r : reports) all.push_back(report_json(r));
    j["reports"] = std::move(all);
    return j.dump(2) + "\n";
  }

  std::ostringstream md;
  md << "| Model |";
  for (const auto& d : table.directions) md << ' ' << d.label() << " |";
  md << " Avg. |\n|---|";
  for (std::size_t i = 0; i < table.directions.size(); ++i) md << "---|";
  md << "---|\n";
  for (const auto& model : table.models) {
    md << "| " << model << " |";
    const auto& row = table.cells.at(model);
    for (const auto& d : table.directions) {
      auto it = row.find(d.label());
      md << ' ' << (it == row.end() ? std::string("-") : fixed(it->second, 1)) << " |";
    }
    md << ' ' << fixed(table.averages.at(model), 1) << " |\n";
  }
  md << "\nScores: " << metric_name(options.metric)
     << " (%) on the evaluation set; Avg. is the unweighted mean over directions.\n";
  for (const auto& note : table.footnotes) md << "\n* " << note << '\n';
  return md.str();
}

std::vector<EvalReport> reports_from_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    std::vector<EvalReport> out;
    for (const auto& r : j.at("reports")) out.push_back(report_from(r));
    return out;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report document: ") + e.what());
  }
}

std::string emit_split_table(const std::map<SplitKey, std::size_t>& counts) {
  // Empty files carry no language; fold them into the dataset's only
  // language when it has exactly one.
  std::map<std::string, std::set<std::string>> langs;
  for (const auto& [key, n] : counts) {
    if (!key.lang.empty()) langs[key.name].insert(key.lang);
  }
  std::map<std::pair<std::string, std::string>, std::map<Split, std::size_t>> rows;
  for (const auto& [key, n] : counts) {
    std::string lang = key.lang;
    if (lang.empty() && langs[key.name].size() == 1) lang = *langs[key.name].begin();
    rows[{key.name, lang}][key.split] += n;
  }
  std::ostringstream md;
  md << "| Dataset | Lang | Train | Dev | Test |\n|---|---|---|---|---|\n";
  for (const auto& [key, splits] : rows) {
    auto get = [&](Split s) {
      auto it = splits.find(s);
      return it == splits.end() ? std::size_t{0} : it->second;
    };
    md << "| " << key.first << " | " << key.second << " | " << get(Split::kTrain) << " | "
       << get(Split::kDev) << " | " << get(Split::kTest) << " |\n";
  }
  return md.str();
}

}  // namespace pxre
