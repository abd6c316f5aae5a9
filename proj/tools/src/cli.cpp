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

#include "pxre_cli/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pxre/checkpoint.hpp"
#include "pxre/corpus_builder.hpp"
#include "pxre/digest.hpp"
#include "pxre/error.hpp"
#include "pxre/logging.hpp"
#include "pxre/noise.hpp"
#include "pxre/prompt_templates.hpp"
#include "pxre/relation_data.hpp"
#include "pxre/report.hpp"
#include "pxre/train_eval.hpp"

namespace pxre::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

/// One artifact-producing run: collects digests and writes the manifest.
class Run {
 public:
  Run(std::span<const std::string> args, std::string subcommand, fs::path out)
      : out_(std::move(out)) {
    manifest_.command.assign(args.begin(), args.end());
    manifest_.subcommand = std::move(subcommand);
    manifest_.started_at = utc_now();
    std::string joined;
    for (const auto& a : args) joined += a + '\n';
    manifest_.config_fingerprint = sha256_hex(joined).substr(0, 16);
    ensure_dir(out_);
  }

  const fs::path& out() const { return out_; }
  RunManifest& manifest() { return manifest_; }

  void input(const fs::path& path) {
    if (fs::is_directory(path)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::recursive_directory_iterator(path)) {
        if (e.is_regular_file()) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) manifest_.inputs.push_back({f.string(), sha256_file(f)});
    } else {
      manifest_.inputs.push_back({path.string(), sha256_file(path)});
    }
  }

  fs::path artifact(const std::string& name, const std::string& text) {
    const auto path = out_ / name;
    write_text(path, text);
    artifact(path);
    return path;
  }
  void artifact(const fs::path& path) {
    manifest_.artifacts.push_back({path.string(), sha256_file(path)});
  }

  void finish() {
    manifest_.finished_at = utc_now();
    write_text(out_ / kManifestFile, to_json(manifest_));
  }

 private:
  fs::path out_;
  RunManifest manifest_;
};

std::string report_file(const EvalReport& r) {
  return "report_" + r.direction.source + "-" + r.direction.target + ".json";
}

void emit_reports(Run& run, const std::vector<EvalReport>& reports, std::ostream& out) {
  for (const auto& r : reports) run.artifact(report_file(r), to_json(r) + "\n");
  const std::string table = emit_report(reports, ReportFormat::kMarkdown);
  run.artifact("table.md", table);
  out << table;
}

std::optional<LangIdPolicy> policy_override(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return parse_lang_id_policy(text);
}

int cmd_render(std::span<const std::string> args, const std::string& tpl_name,
               const std::string& data, const std::string& out_dir, bool lang_id,
               const std::vector<std::string>& languages, std::ostream& out) {
  Run run(args, "render", out_dir);
  const PromptTemplate tpl = resolve_template(tpl_name);
  if (fs::exists(tpl_name)) run.input(tpl_name);
  run.input(data);
  const Dataset ds = load_jsonl(data);
  const LanguageRegistry registry(languages);
  std::string lines;
  for (const auto& inst : ds.instances) {
    RenderedPair pair = render(tpl, inst);
    if (lang_id) pair = wrap_language_ids(std::move(pair), inst.lang, registry);
    ordered_json j;
    j["id"] = inst.id;
    j["lang"] = inst.lang;
    j["template"] = tpl.name;
    j["enc"] = pair.enc.joined();
    j["dec"] = pair.dec.joined();
    lines += j.dump() + "\n";
  }
  run.artifact("rendered.jsonl", lines);
  run.finish();
  out << "rendered " << ds.size() << " instances with " << tpl.name << " to "
      << (run.out() / "rendered.jsonl").string() << "\n";
  return kExitOk;
}

struct PretrainArgs {
  std::string corpus;
  std::string out;
  std::string config;
  std::string init;
  std::vector<std::string> vocab_from;
  int epochs = 1;
  int steps = 0;
  int batch_size = 8;
  double lr = 1e-3;
  std::uint64_t seed = 1;
};

int cmd_pretrain(std::span<const std::string> args, const PretrainArgs& a, std::ostream& out) {
  Run run(args, "pretrain", a.out);
  ExperimentConfig config;
  if (!a.config.empty()) {
    config = load_experiment_config(a.config);
    run.input(a.config);
  }
  run.input(a.corpus);
  const auto corpus = load_monolingual_corpus(a.corpus);
  std::unique_ptr<Backbone> backbone;
  if (!a.init.empty()) {
    const auto path = resolve_checkpoint(a.init);
    run.input(path);
    backbone = load_backbone(path);
  } else {
    Vocab vocab{LanguageRegistry(config.languages)};
    for (const auto& s : corpus) vocab.add_all(s.tokens);
    for (const auto& f : a.vocab_from) {
      run.input(f);
      for (const auto& inst : load_jsonl(f).instances) vocab.add_all(inst.tokens);
    }
    BackboneConfig toy = config.toy;
    toy.seed = a.seed;
    backbone = std::make_unique<TransformerBackbone>(toy, std::move(vocab));
  }
  PretrainOptions options;
  options.adam.lr = a.lr;
  options.epochs = a.epochs;
  options.steps = a.steps;
  options.batch_size = a.batch_size;
  options.seed = a.seed;
  const auto history = pretrain(*backbone, corpus, options);

  const auto ckpt = run.out() / "backbone.ckpt";
  save_backbone(ckpt, *backbone);
  run.artifact(ckpt);
  ordered_json log = {{"steps", history.size()}, {"loss", history}};
  run.artifact("pretrain_log.json", log.dump(2) + "\n");
  run.manifest().seed = a.seed;
  run.finish();
  out << "pretrained " << backbone->parameter_count() << " parameters on " << corpus.size()
      << " sentences; final loss " << (history.empty() ? 0.0 : history.back()) << "\n";
  return kExitOk;
}

int cmd_train(std::span<const std::string> args, const std::string& config_path,
              const std::string& out_dir, std::ostream& out) {
  const ExperimentConfig config = load_experiment_config(config_path);
  Run run(args, "train", out_dir);
  run.manifest().config_fingerprint = config.fingerprint();
  run.manifest().seed = config.seed;
  run.input(config_path);
  if (config.train_data.empty()) throw ConfigError("config has no train_data");
  if (config.dev_data.empty()) throw DataError("dev set required for checkpoint selection");
  run.input(config.train_data);
  run.input(config.dev_data);
  for (const auto& f : config.vocab_files) run.input(f);
  if (config.backbone != "toy") run.input(config.backbone);

  ExperimentConfig resolved = config;
  if (resolved.backbone != "toy") resolved.backbone = resolve_checkpoint(config.backbone).string();
  const Dataset train_set = load_jsonl(config.train_data);
  const Dataset dev_set = load_jsonl(config.dev_data, train_set.label_space);
  const CheckpointSet set = train(resolved, train_set, dev_set);
  const Checkpoint& best = select_checkpoint(set);
  RelationModel model = *best.snapshot;

  const auto ckpt = run.out() / "model.ckpt";
  save_model(ckpt, model);
  run.artifact(ckpt);
  ordered_json epochs = ordered_json::array();
  for (const auto& c : set.checkpoints) {
    epochs.push_back({{"epoch", c.epoch},
                      {"dev_loss", c.dev_loss},
                      {"train_loss", c.train_loss},
                      {"train_accuracy", c.train_accuracy},
                      {"selected", c.epoch == best.epoch}});
  }
  run.artifact("checkpoints.json", epochs.dump(2) + "\n");

  std::vector<EvalReport> reports;
  if (!config.test_data.empty()) {
    run.input(config.test_data);
    reports.push_back(evaluate(model, load_jsonl(config.test_data, model.spec().labels)));
  }
  if (!config.target_langs.empty() && !config.target_data.empty()) {
    std::vector<Dataset> targets;
    for (const auto& lang : config.target_langs) {
      targets.push_back(load_target_dataset(config.target_data, lang, model.spec().labels));
    }
    run.input(config.target_data);
    for (auto& r : zero_shot_eval(config, model, targets)) reports.push_back(std::move(r));
  }
  out << "selected epoch " << best.epoch << " (dev loss " << best.dev_loss << ") of "
      << set.checkpoints.size() << " checkpoints\n";
  if (!reports.empty()) emit_reports(run, reports, out);
  run.finish();
  return kExitOk;
}

int cmd_eval(std::span<const std::string> args, const std::string& model_ref,
             const std::string& data, const std::string& out_dir, const std::string& policy,
             std::ostream& out) {
  const auto path = resolve_checkpoint(model_ref);
  Run run(args, "eval", out_dir);
  run.input(path);
  run.input(data);
  RelationModel model = load_model(path);
  if (auto p = policy_override(policy)) model.set_lang_id_policy(*p);
  run.manifest().config_fingerprint = model.spec().config_fingerprint;
  const std::vector<EvalReport> reports{evaluate(model, load_jsonl(data, model.spec().labels))};
  emit_reports(run, reports, out);
  run.finish();
  return kExitOk;
}

int cmd_zeroshot(std::span<const std::string> args, const std::string& model_ref,
                 const std::vector<std::string>& langs, const std::string& data_dir,
                 const std::string& tpl_name, const std::string& out_dir,
                 const std::string& policy, std::ostream& out) {
  const auto path = resolve_checkpoint(model_ref);
  Run run(args, "zeroshot", out_dir);
  run.input(path);
  RelationModel model = load_model(path);
  if (auto p = policy_override(policy)) model.set_lang_id_policy(*p);
  run.manifest().config_fingerprint = model.spec().config_fingerprint;
  const std::string dir = data_dir.empty() ? model.spec().target_data : data_dir;
  if (dir.empty()) {
    throw ConfigError("no target data: pass --data or train with target_data set");
  }
  std::vector<Dataset> targets;
  for (const auto& lang : langs) {
    targets.push_back(load_target_dataset(dir, lang, model.spec().labels));
  }
  run.input(dir);
  const PromptTemplate tpl = tpl_name.empty() ? model.spec().prompt : resolve_template(tpl_name);
  emit_reports(run, zero_shot_eval(model, tpl, targets), out);
  run.finish();
  return kExitOk;
}

struct BuildArgs {
  std::string conllu;
  std::string target;
  std::string out;
  std::string lexicon;
  std::string target_lang = "zh";
  std::string name = "wmt17-enzh";
  std::size_t k = 106;
  std::vector<double> ratios{0.9424, 0.0225, 0.0351};
  std::uint64_t seed = 1;
};

int cmd_build(std::span<const std::string> args, const BuildArgs& a, std::ostream& out) {
  Run run(args, "build-dataset", a.out);
  run.input(a.conllu);
  run.input(a.target);
  CorpusBuildOptions options;
  options.k = a.k;
  options.ratios = {a.ratios.at(0), a.ratios.at(1), a.ratios.at(2)};
  options.seed = a.seed;
  options.target_lang = a.target_lang;
  options.name = a.name;
  if (!a.lexicon.empty()) {
    run.input(a.lexicon);
    options.lexicon = load_lexicon(a.lexicon, default_lexicon());
  }
  const BuildReport report = build_corpus(a.conllu, a.target, options, run.out());
  for (const char* f : {"train.jsonl", "dev.jsonl", "test.jsonl", "build_report.json"}) {
    run.artifact(run.out() / f);
  }
  run.manifest().seed = a.seed;
  run.finish();
  out << "built " << report.stats.instances << " instances (" << report.split[0] << "/"
      << report.split[1] << "/" << report.split[2] << "), " << report.top_k.size()
      << " relation types\n";
  return kExitOk;
}

int cmd_validate(const std::vector<std::string>& paths, std::ostream& out, std::ostream& err) {
  constexpr std::size_t kShown = 10;
  std::size_t bad = 0;
  for (const auto& p : paths) {
    std::vector<fs::path> files;
    if (fs::is_directory(p)) {
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(p);
    }
    for (const auto& f : files) {
      const Dataset ds = load_jsonl(f);
      const auto violations = validate(ds);
      if (violations.empty()) {
        out << "ok " << f.string() << " (" << ds.size() << " instances)\n";
        continue;
      }
      ++bad;
      err << f.string() << ": " << violations.size() << " violation(s)\n";
      for (std::size_t i = 0; i < std::min(kShown, violations.size()); ++i) {
        err << "  " << violations[i].instance_id << ": " << violations[i].message << "\n";
      }
    }
  }
  return bad == 0 ? kExitOk : kExitDomain;
}

ReportOptions report_options(const std::string& metric, const std::vector<std::string>& refs) {
  ReportOptions o;
  o.metric = parse_report_metric(metric);
  for (const auto& r : refs) {
    const auto eq = r.rfind('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--reference-avg expects MODEL=VALUE, got '" + r + "'");
    }
    try {
      o.reference_avg[r.substr(0, eq)] = std::stod(r.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("--reference-avg expects a number after '=', got '" + r + "'");
    }
  }
  return o;
}

int cmd_report(std::span<const std::string> args, const std::string& in_dir,
               const std::string& format, const ReportOptions& options,
               const std::string& out_dir, std::ostream& out) {
  const auto reports = read_reports(in_dir);
  const ReportFormat fmt = parse_report_format(format);
  const std::string text = emit_report(reports, fmt, options);
  if (out_dir.empty()) {
    out << text;
    return kExitOk;
  }
  Run run(args, "report", out_dir);
  for (const auto& e : fs::recursive_directory_iterator(in_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json" &&
        e.path().filename() != kManifestFile) {
      run.input(e.path());
    }
  }
  run.artifact(fmt == ReportFormat::kJson ? "report.json" : "report.md", text);
  run.finish();
  out << text;
  return kExitOk;
}

int cmd_report_splits(std::span<const std::string> args, const std::string& data,
                      const std::string& out_dir, std::ostream& out) {
  const auto datasets = load_directory(data);
  const std::string text = emit_split_table(split_counts(datasets));
  if (!out_dir.empty()) {
    Run run(args, "report splits", out_dir);
    run.input(data);
    run.artifact("splits.md", text);
    run.finish();
  }
  out << text;
  return kExitOk;
}

}  // namespace

std::string to_json(const RunManifest& m) {
  ordered_json j;
  j["schema"] = kManifestSchema;
  j["command"] = m.command;
  j["subcommand"] = m.subcommand;
  j["config_fingerprint"] = m.config_fingerprint;
  j["seed"] = m.seed;
  auto digests = [](const std::vector<FileDigest>& files) {
    ordered_json a = ordered_json::array();
    for (const auto& f : files) a.push_back({{"path", f.path}, {"sha256", f.sha256}});
    return a;
  };
  j["inputs"] = digests(m.inputs);
  j["artifacts"] = digests(m.artifacts);
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  return j.dump(2) + "\n";
}

RunManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read manifest '" + path.string() + "'");
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.value("schema", std::string()) != kManifestSchema) {
      throw DataError("'" + path.string() + "' is not a run manifest");
    }
    RunManifest m;
    m.command = j.at("command").get<std::vector<std::string>>();
    m.subcommand = j.at("subcommand").get<std::string>();
    m.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto* key : {"inputs", "artifacts"}) {
      auto& target = std::string(key) == "inputs" ? m.inputs : m.artifacts;
      for (const auto& f : j.at(key)) {
        target.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
      }
    }
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed manifest '" + path.string() + "': " + e.what());
  }
}

fs::path resolve_checkpoint(const std::string& ref) {
  if (fs::exists(ref)) return ref;
  const char* cache = std::getenv("PXRE_CACHE");
  if (cache && *cache) {
    const fs::path candidate = fs::path(cache) / ref;
    if (fs::exists(candidate)) return candidate;
    throw IoError("checkpoint '" + ref + "' not found (also tried '" + candidate.string() + "')");
  }
  throw IoError("checkpoint '" + ref + "' not found (PXRE_CACHE is unset)");
}

int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prompt-based fine-tuning for cross-lingual relation extraction", "pxre"};
  app.require_subcommand(1);
  bool log_json = false;
  std::string log_level = "info";
  app.add_flag("--log-json", log_json, "Structured JSON log lines on stderr");
  app.add_option("--log-level", log_level, "debug, info, warn or error")
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

  const std::vector<std::string> default_langs{"en", "zh", "ar"};

  // render
  auto* render_cmd = app.add_subcommand("render", "Render instances through a template");
  std::string r_template;
  std::string r_data;
  std::string r_out;
  bool r_lang_id = false;
  std::vector<std::string> r_langs = default_langs;
  render_cmd->add_option("--template", r_template, "Builtin name or template file")->required();
  render_cmd->add_option("--data", r_data, "Instances (JSONL)")->required();
  render_cmd->add_option("--out", r_out, "Output directory")->required();
  render_cmd->add_flag("--lang-id", r_lang_id, "Wrap with the data's language id");
  render_cmd->add_option("--languages", r_langs, "Registered languages")->delimiter(',');

  // pretrain
  auto* pretrain_cmd = app.add_subcommand("pretrain", "Denoising pretraining of a toy backbone");
  PretrainArgs p;
  pretrain_cmd->add_option("--corpus", p.corpus, "Directory of <lang>.txt files")->required();
  pretrain_cmd->add_option("--out", p.out, "Output directory")->required();
  pretrain_cmd->add_option("--config", p.config, "Experiment config for architecture/languages");
  pretrain_cmd->add_option("--init", p.init, "Continue from a backbone checkpoint");
  pretrain_cmd->add_option("--vocab-from", p.vocab_from, "JSONL files whose tokens join the vocab")
      ->delimiter(',');
  pretrain_cmd->add_option("--epochs", p.epochs, "Full passes when --steps is 0")
      ->check(CLI::NonNegativeNumber);
  pretrain_cmd->add_option("--steps", p.steps, "Optimizer steps")->check(CLI::NonNegativeNumber);
  pretrain_cmd->add_option("--batch-size", p.batch_size)->check(CLI::PositiveNumber);
  pretrain_cmd->add_option("--lr", p.lr)->check(CLI::PositiveNumber);
  pretrain_cmd->add_option("--seed", p.seed);

  // train
  auto* train_cmd = app.add_subcommand("train", "Fine-tune and select a checkpoint by dev loss");
  std::string t_config;
  std::string t_out = "runs/train";
  train_cmd->add_option("--config", t_config, "Experiment config file")->required();
  train_cmd->add_option("--out", t_out, "Output directory");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on one dataset");
  std::string e_model;
  std::string e_data;
  std::string e_out = "runs/eval";
  std::string e_policy;
  eval_cmd->add_option("--model", e_model, "Model checkpoint")->required();
  eval_cmd->add_option("--data", e_data, "Instances (JSONL)")->required();
  eval_cmd->add_option("--out", e_out, "Output directory");
  eval_cmd->add_option("--lang-id-policy", e_policy, "data or source")
      ->check(CLI::IsMember({"data", "source"}));

  // zeroshot
  auto* zs_cmd = app.add_subcommand("zeroshot", "Zero-shot cross-lingual evaluation");
  std::string z_model;
  std::vector<std::string> z_targets;
  std::string z_data;
  std::string z_template;
  std::string z_out = "runs/zeroshot";
  std::string z_policy;
  zs_cmd->add_option("--model", z_model, "Model checkpoint")->required();
  zs_cmd->add_option("--targets", z_targets, "Target languages")->required()->delimiter(',');
  zs_cmd->add_option("--data", z_data, "Target data directory");
  zs_cmd->add_option("--template", z_template, "Must match the training template");
  zs_cmd->add_option("--out", z_out, "Output directory");
  zs_cmd->add_option("--lang-id-policy", z_policy, "data or source")
      ->check(CLI::IsMember({"data", "source"}));

  // build-dataset
  auto* build_cmd = app.add_subcommand("build-dataset", "Build a relation dataset from parses");
  BuildArgs b;
  build_cmd->add_option("--conllu", b.conllu, "Dependency-parsed source sentences")->required();
  build_cmd->add_option("--target", b.target, "Line-aligned target sentences")->required();
  build_cmd->add_option("--out", b.out, "Output directory")->required();
  build_cmd->add_option("--k", b.k, "Relation types to keep")->check(CLI::PositiveNumber);
  build_cmd->add_option("--ratios", b.ratios, "train,dev,test")->delimiter(',')->expected(3);
  build_cmd->add_option("--seed", b.seed);
  build_cmd->add_option("--lexicon", b.lexicon, "form<TAB>lemma overrides");
  build_cmd->add_option("--target-lang", b.target_lang);
  build_cmd->add_option("--name", b.name, "Dataset name");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Check datasets against the schema");
  std::vector<std::string> v_paths;
  validate_cmd->add_option("--data,data", v_paths, "JSONL files or directories")->required();

  // report
  auto* report_cmd = app.add_subcommand("report", "Tabulate evaluation reports");
  report_cmd->require_subcommand(0, 1);
  std::string rp_in;
  std::string rp_format = "md";
  std::string rp_metric = "micro_f1";
  std::string rp_out;
  std::vector<std::string> rp_refs;
  report_cmd->add_option("--in", rp_in, "Directory of report JSON files");
  report_cmd->add_option("--format", rp_format, "md or json")->check(CLI::IsMember({"md", "json"}));
  report_cmd->add_option("--metric", rp_metric, "micro_f1, macro_f1 or accuracy")
      ->check(CLI::IsMember({"micro_f1", "macro_f1", "accuracy"}));
  report_cmd->add_option("--reference-avg", rp_refs, "MODEL=VALUE printed average to compare");
  report_cmd->add_option("--out", rp_out, "Output directory");
  auto* splits_cmd = report_cmd->add_subcommand("splits", "Split-count table of a data tree");
  std::string s_data;
  std::string s_out;
  splits_cmd->add_option("--data", s_data, "Dataset directory")->required();
  splits_cmd->add_option("--out", s_out, "Output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (report_cmd->parsed() && !splits_cmd->parsed() && rp_in.empty()) {
      throw CLI::RequiredError("--in");
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  log::set_json(log_json);
  const std::map<std::string, log::Level> levels{{"debug", log::Level::kDebug},
                                                 {"info", log::Level::kInfo},
                                                 {"warn", log::Level::kWarn},
                                                 {"error", log::Level::kError}};
  log::set_min_level(levels.at(log_level));

  try {
    if (render_cmd->parsed()) {
      return cmd_render(args, r_template, r_data, r_out, r_lang_id, r_langs, out);
    }
    if (pretrain_cmd->parsed()) return cmd_pretrain(args, p, out);
    if (train_cmd->parsed()) return cmd_train(args, t_config, t_out, out);
    if (eval_cmd->parsed()) return cmd_eval(args, e_model, e_data, e_out, e_policy, out);
    if (zs_cmd->parsed()) {
      return cmd_zeroshot(args, z_model, z_targets, z_data, z_template, z_out, z_policy, out);
    }
    if (build_cmd->parsed()) return cmd_build(args, b, out);
    if (validate_cmd->parsed()) return cmd_validate(v_paths, out, err);
    if (splits_cmd->parsed()) return cmd_report_splits(args, s_data, s_out, out);
    if (report_cmd->parsed()) {
      return cmd_report(args, rp_in, rp_format, report_options(rp_metric, rp_refs), rp_out, out);
    }
  } catch (const std::exception& e) {
    // Domain errors and anything unexpected both exit 1; usage errors were
    // handled during parsing.
    if (log_json) {
      log::error(e.what());
    } else {
      err << "error: " << e.what() << "\n";
    }
    return kExitDomain;
  }
  err << app.help();
  return kExitUsage;
}

int dispatch(std::span<const std::string> args) { return dispatch(args, std::cout, std::cerr); }

}  // namespace pxre::cli
