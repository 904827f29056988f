#include "pcp/cli.h"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcp/error.h"
#include "pcp/eval.h"
#include "pcp/metrics.h"
#include "pcp/mock_scorer.h"
#include "pcp/prompt.h"
#include "pcp/reference_scorer.h"
#include "pcp/remote_scorer.h"
#include "pcp/text.h"
#include "pcp/verbalizer.h"

namespace pcp {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr const char* kToolVersion = "1.0.0";

std::string utc_timestamp() {
  std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---- config reading ------------------------------------------------------

class ConfigReader {
 public:
  std::vector<std::string> violations;

  void allow_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> keys) {
    for (const auto& [key, value] : obj.items()) {
      if (std::find_if(keys.begin(), keys.end(), [&](const char* k) {
            return key == k;
          }) == keys.end()) {
        violations.push_back(where + key + ": unknown key");
      }
    }
  }

  bool object(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_object()) {
      violations.push_back(where + key + ": expected an object");
      return false;
    }
    return true;
  }

  void string(const json& obj, const char* key, const std::string& where,
              std::string& out) {
    read(obj, key, where, "a string", &json::is_string,
         [&](const json& v) { out = v.get<std::string>(); });
  }

  void boolean(const json& obj, const char* key, const std::string& where,
               bool& out) {
    read(obj, key, where, "a boolean", &json::is_boolean,
         [&](const json& v) { out = v.get<bool>(); });
  }

  void number(const json& obj, const char* key, const std::string& where,
              double& out) {
    read(obj, key, where, "a number", &json::is_number,
         [&](const json& v) { out = v.get<double>(); });
  }

  template <typename T>
  void count(const json& obj, const char* key, const std::string& where,
             T& out) {
    read(obj, key, where, "a non-negative integer", &json::is_number_unsigned,
         [&](const json& v) { out = v.get<T>(); });
  }

  void integer(const json& obj, const char* key, const std::string& where,
               int& out) {
    read(obj, key, where, "an integer", &json::is_number_integer,
         [&](const json& v) { out = v.get<int>(); });
  }

  // Reads a string and converts it with `parse`, recording conversion
  // failures as violations.
  template <typename Parse>
  void parsed(const json& obj, const char* key, const std::string& where,
              Parse parse) {
    std::string raw;
    bool present = obj.contains(key);
    string(obj, key, where, raw);
    if (!present || !obj.at(key).is_string()) return;
    try {
      parse(raw);
    } catch (const Error& e) {
      violations.push_back(where + key + ": " + e.what());
    }
  }

 private:
  void read(const json& obj, const char* key, const std::string& where,
            const char* expected, bool (json::*is)() const noexcept,
            const std::function<void(const json&)>& assign) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!((*it).*is)()) {
      violations.push_back(where + key + ": expected " + expected);
      return;
    }
    assign(*it);
  }
};

std::vector<std::string> config_violations(const ExperimentConfig& cfg) {
  std::vector<std::string> v;
  for (const auto& s : cfg.train.violations()) v.push_back("train: " + s);
  if (cfg.train.jobs < 1) v.push_back("jobs: must be at least 1");
  const auto& kind = cfg.scorer.kind;
  if (kind != "mock" && kind != "reference" && kind != "remote") {
    v.push_back("scorer.kind: must be mock, reference or remote");
  }
  if (cfg.data.format != "normalized" && cfg.data.format != "conll16") {
    v.push_back("data.format: must be normalized or conll16");
  }
  if (cfg.scorer.remote.timeout_ms <= 0) {
    v.push_back("scorer.timeout_ms: must be positive");
  }
  if (cfg.scorer.remote.retries < 0) {
    v.push_back("scorer.retries: must be non-negative");
  }
  if (!(cfg.scorer.reference.init_scale >= 0.0)) {
    v.push_back("scorer.init_scale: must be non-negative");
  }
  if (cfg.output_dir.empty()) v.push_back("output_dir: must not be empty");
  return v;
}

// ---- experiment context --------------------------------------------------

struct Context {
  ExperimentConfig config;
  std::optional<Template> tmpl;
  std::optional<Verbalizer> verbalizer;
  SchemeId scheme = SchemeId::kPdtbTop4;
  std::string echo;
};

bool is_builtin_verbalizer(const std::string& id) {
  auto ids = builtin_verbalizer_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

std::vector<Template> load_template_file(const ExperimentConfig& cfg) {
  std::ifstream in(cfg.resolve(cfg.template_file));
  if (!in) throw IoError("cannot open template file " + cfg.template_file);
  try {
    return parse_template_file(in);
  } catch (const ParseError& e) {
    throw ParseError(0, cfg.template_file + ": " + e.what());
  }
}

Template find_template(const ExperimentConfig& cfg, const std::string& id) {
  if (!cfg.template_file.empty()) {
    for (auto& t : load_template_file(cfg)) {
      if (t.id() == id) return t;
    }
  }
  return builtin_template(id);
}

Verbalizer load_verbalizer(const ExperimentConfig& cfg) {
  std::string id = cfg.effective_verbalizer();
  if (is_builtin_verbalizer(id)) return builtin_verbalizer(id);
  std::ifstream in(cfg.resolve(id));
  if (!in) {
    throw IoError("verbalizer '" + id +
                  "' is neither a builtin id nor a readable file");
  }
  try {
    return parse_verbalizer(in, cfg.scheme);
  } catch (const ParseError& e) {
    throw ParseError(0, id + ": " + e.what());
  }
}

// Resolves template, verbalizer and scheme and checks that they fit the
// mode. Every problem is reported in one ConfigError.
Context prepare(const ExperimentConfig& cfg) {
  Context ctx;
  ctx.config = cfg;
  std::vector<std::string> v = config_violations(cfg);
  try {
    ctx.tmpl = find_template(cfg, cfg.effective_template_id());
  } catch (const Error& e) {
    v.push_back(std::string("template: ") + e.what());
  }
  try {
    ctx.verbalizer = load_verbalizer(cfg);
  } catch (const Error& e) {
    v.push_back(std::string("verbalizer: ") + e.what());
  }
  if (ctx.verbalizer) {
    ctx.scheme = ctx.verbalizer->scheme_id();
    if (cfg.scheme && *cfg.scheme != ctx.scheme) {
      v.push_back("scheme: " + scheme_name(*cfg.scheme) +
                  " does not match the verbalizer's scheme " +
                  scheme_name(ctx.scheme));
    }
    bool relation_words =
        ctx.verbalizer->kind() == AnswerKind::kRelationWord;
    if (cfg.mode == Mode::kPcp && relation_words) {
      v.push_back("verbalizer: PCP mode needs connective answer sets");
    }
    if (cfg.mode != Mode::kPcp && !relation_words) {
      v.push_back("verbalizer: " + mode_name(cfg.mode) +
                  " mode needs relation-word answer sets");
    }
    if (cfg.mode == Mode::kPedrr && !is_explicit_scheme(ctx.scheme)) {
      v.push_back("scheme: PEDRR mode needs an explicit-relation scheme");
    }
    if (cfg.mode != Mode::kPedrr && is_explicit_scheme(ctx.scheme)) {
      v.push_back("scheme: explicit-relation schemes need PEDRR mode");
    }
  }
  if (ctx.tmpl) {
    bool needs_conn = ctx.tmpl->requires_connective();
    if (cfg.mode == Mode::kPedrr && !needs_conn) {
      v.push_back("template: PEDRR mode needs a template with a connective "
                  "slot");
    }
    if (cfg.mode != Mode::kPedrr && needs_conn) {
      v.push_back("template: only PEDRR mode may use a connective slot");
    }
  }
  if (!v.empty()) throw ConfigError(v);
  ctx.echo = cfg.echo();
  return ctx;
}

// ---- data ----------------------------------------------------------------

std::vector<RelationInstance> read_corpus(const std::string& path,
                                          const std::string& format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return format == "conll16" ? parse_conll16(in) : parse_normalized(in);
  } catch (const ParseError& e) {
    throw ParseError(0, path + ": " + e.what());
  } catch (const SchemaError& e) {
    throw ParseError(0, path + ": " + e.what());
  }
}

// Instances of one split that take part in the context's scheme.
std::vector<RelationInstance> load_split(const Context& ctx, Split split) {
  const auto& cfg = ctx.config;
  const auto& d = cfg.data;
  std::vector<RelationInstance> all;
  if (!d.corpus.empty()) {
    for (auto& inst : read_corpus(cfg.resolve(d.corpus).string(), d.format)) {
      if (assign_split(inst, cfg.dataset) == split) {
        all.push_back(std::move(inst));
      }
    }
  } else {
    const std::string* path = split == Split::kTrain ? &d.train
                              : split == Split::kDev ? &d.dev
                              : split == Split::kTest ? &d.test
                                                      : nullptr;
    if (path == nullptr || path->empty()) {
      throw UsageError("no data configured for the " + split_name(split) +
                       " split (set data.corpus or data." +
                       split_name(split) + ")");
    }
    all = read_corpus(cfg.resolve(*path).string(), d.format);
  }
  return select_for_scheme(all, ctx.scheme);
}

Split parse_eval_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw UsageError("unknown split '" + name + "' (train, dev or test)");
}

// ---- scorers -------------------------------------------------------------

fs::path default_checkpoint(const ExperimentConfig& cfg) {
  return cfg.resolve(cfg.output_dir) / "checkpoint.json";
}

std::unique_ptr<Scorer> make_remote(const ExperimentConfig& cfg) {
  return std::make_unique<RemoteScorer>(cfg.scorer.remote);
}

// A scorer ready for fitting under `tmpl`. The reference scorer builds its
// feature vocabulary from the rendered training prompts.
std::unique_ptr<Scorer> make_fresh_scorer(
    const ExperimentConfig& cfg, const Template& tmpl,
    std::span<const RelationInstance> train) {
  const auto& kind = cfg.scorer.kind;
  if (kind == "mock") {
    return std::make_unique<MockScorer>(cfg.scorer.mock_scores,
                                        cfg.scorer.mock_default_score);
  }
  if (kind == "remote") return make_remote(cfg);
  std::vector<std::string> texts;
  for (const auto& inst : train) {
    texts.push_back(render_instance(inst, tmpl).text);
  }
  return std::make_unique<ReferenceScorer>(cfg.scorer.reference, texts);
}

// A scorer for inference: restored from the checkpoint written by `train`.
// Remote scorers without a checkpoint run zero-shot.
std::unique_ptr<Scorer> make_trained_scorer(const ExperimentConfig& cfg,
                                            const std::string& checkpoint) {
  const auto& kind = cfg.scorer.kind;
  if (kind == "mock") {
    return std::make_unique<MockScorer>(cfg.scorer.mock_scores,
                                        cfg.scorer.mock_default_score);
  }
  fs::path path = checkpoint.empty() ? default_checkpoint(cfg)
                                     : fs::path(checkpoint);
  bool exists = fs::exists(path);
  if (kind == "reference") {
    if (!exists) {
      throw UsageError("no checkpoint at " + path.string() +
                       "; run `pcp train` first or pass --checkpoint");
    }
    return std::make_unique<ReferenceScorer>(
        ReferenceScorer::load(path.string()));
  }
  auto scorer = make_remote(cfg);
  if (exists) {
    json j;
    try {
      j = json::parse(read_file(path.string()));
      scorer->load_checkpoint(j.at("checkpoint_id").get<std::string>());
    } catch (const json::exception& e) {
      throw ParseError(0, path.string() + ": " + e.what());
    }
  } else if (!checkpoint.empty()) {
    throw IoError("no checkpoint at " + path.string());
  }
  return scorer;
}

// ---- output --------------------------------------------------------------

fs::path ensure_output_dir(const ExperimentConfig& cfg) {
  fs::path dir = cfg.resolve(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

ojson metadata(const std::string& command) {
  ojson m;
  m["command"] = command;
  m["tool_version"] = kToolVersion;
  m["timestamp"] = utc_timestamp();
  return m;
}

// Every JSON artifact opens with the config echo and closes with the
// metadata block; only metadata.timestamp varies between identical runs.
void write_report(const fs::path& path, const std::string& echo,
                  const std::string& command, const ojson& body) {
  ojson doc;
  doc["config_echo"] = ojson::parse(echo);
  for (const auto& [k, v] : body.items()) doc[k] = v;
  doc["metadata"] = metadata(command);
  write_file(path.string(), doc.dump(2) + "\n");
}

// Text artifacts carry the echo as a leading comment line.
void write_text(const fs::path& path, const std::string& echo,
                const std::string& body) {
  write_file(path.string(), "# config: " + echo + "\n" + body);
}

// ---- subcommands ---------------------------------------------------------

struct Overrides {
  std::string config;
  std::string output_dir;
  std::optional<std::size_t> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<double> learning_rate;
  std::optional<double> weight_decay;
  std::optional<double> label_smoothing;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> max_epochs;
  std::string mode;
  std::string scheme;
  std::string template_id;
  std::string template_file;
  std::string verbalizer;
  std::string scorer;
  std::string endpoint;
  bool full_vocabulary = false;
};

std::string absolute_path(const std::string& p) {
  return p.empty() ? p : fs::absolute(p).string();
}

// Config file (if any), then the sidecar env var, then flags.
ExperimentConfig effective_config(const Overrides& o) {
  ExperimentConfig cfg = o.config.empty()
                             ? ExperimentConfig{}
                             : load_experiment_config(o.config);
  if (const char* url = std::getenv(kSidecarEnvVar); url && *url) {
    cfg.scorer.remote.url = url;
  }
  std::vector<std::string> v;
  auto parse_into = [&](const char* what, auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      v.push_back(std::string(what) + ": " + e.what());
    }
  };
  if (!o.output_dir.empty()) cfg.output_dir = absolute_path(o.output_dir);
  if (o.jobs) cfg.train.jobs = *o.jobs;
  if (o.seed) cfg.train.seed = *o.seed;
  if (o.learning_rate) cfg.train.learning_rate = *o.learning_rate;
  if (o.weight_decay) cfg.train.weight_decay = *o.weight_decay;
  if (o.label_smoothing) cfg.train.label_smoothing = *o.label_smoothing;
  if (o.batch_size) cfg.train.batch_size = *o.batch_size;
  if (o.max_epochs) cfg.train.max_epochs = *o.max_epochs;
  if (!o.mode.empty()) {
    parse_into("--mode", [&] { cfg.mode = parse_mode(o.mode); });
  }
  if (!o.scheme.empty()) {
    parse_into("--scheme", [&] { cfg.scheme = parse_scheme(o.scheme); });
  }
  if (!o.template_id.empty()) cfg.template_id = o.template_id;
  if (!o.template_file.empty()) {
    cfg.template_file = absolute_path(o.template_file);
  }
  if (!o.verbalizer.empty()) {
    cfg.verbalizer = is_builtin_verbalizer(o.verbalizer)
                         ? o.verbalizer
                         : absolute_path(o.verbalizer);
  }
  if (!o.scorer.empty()) cfg.scorer.kind = o.scorer;
  if (!o.endpoint.empty()) cfg.scorer.remote.url = o.endpoint;
  if (o.full_vocabulary) cfg.restrict_to_answers = false;
  for (auto& s : config_violations(cfg)) v.push_back(std::move(s));
  if (!v.empty()) throw ConfigError(v);
  return cfg;
}

EvalOptions eval_options(const ExperimentConfig& cfg) {
  EvalOptions opt;
  opt.restrict_to_answers = cfg.restrict_to_answers;
  opt.jobs = cfg.train.jobs;
  return opt;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

int cmd_train(const Overrides& o, std::ostream& out) {
  Context ctx = prepare(effective_config(o));
  const auto& cfg = ctx.config;
  auto train = load_split(ctx, Split::kTrain);
  auto dev = load_split(ctx, Split::kDev);
  auto scorer = make_fresh_scorer(cfg, *ctx.tmpl, train);
  TrainRun run = fit(train, dev, *ctx.tmpl, *ctx.verbalizer, *scorer,
                     cfg.train);
  Evaluation ev =
      evaluate(dev, *ctx.tmpl, *ctx.verbalizer, *scorer, eval_options(cfg));

  fs::path dir = ensure_output_dir(cfg);
  ojson ckpt;
  if (auto* ref = dynamic_cast<ReferenceScorer*>(scorer.get())) {
    ckpt = ojson::parse(ref->to_json());
  } else {
    ckpt["format"] = "pcp-remote-checkpoint";
    ckpt["checkpoint_id"] = run.selected_checkpoint;
  }
  write_report(dir / "checkpoint.json", ctx.echo, "train", ckpt);

  ojson body;
  body["scheme"] = scheme_name(ctx.scheme);
  body["template_id"] = ctx.tmpl->id();
  body["run"] = ojson::parse(run.to_json());
  ojson dev_summary;
  dev_summary["instances"] = ev.predictions.size();
  dev_summary["accuracy"] = ev.metrics.accuracy;
  dev_summary["macro_f1"] = ev.metrics.macro_f1;
  dev_summary["top_level_accuracy"] =
      top_level_accuracy(ev.predictions, *ctx.verbalizer);
  body["dev"] = dev_summary;
  write_report(dir / "train_report.json", ctx.echo, "train", body);

  out << "selected epoch " << run.selected_epoch << " of "
      << run.epochs.size() << "; dev accuracy " << fmt(ev.metrics.accuracy)
      << ", dev top-level accuracy "
      << fmt(dev_summary["top_level_accuracy"].get<double>()) << "\n"
      << "wrote " << (dir / "train_report.json").string() << "\n";
  return kExitOk;
}

int cmd_eval(const Overrides& o, const std::string& checkpoint,
             const std::string& split_flag, std::ostream& out) {
  Context ctx = prepare(effective_config(o));
  const auto& cfg = ctx.config;
  Split split = parse_eval_split(split_flag);
  auto instances = load_split(ctx, split);
  auto scorer = make_trained_scorer(cfg, checkpoint);
  Evaluation ev = evaluate(instances, *ctx.tmpl, *ctx.verbalizer, *scorer,
                           eval_options(cfg));

  fs::path dir = ensure_output_dir(cfg);
  ojson body;
  body["split"] = split_name(split);
  body["scheme"] = scheme_name(ctx.scheme);
  body["template_id"] = ctx.tmpl->id();
  body["skipped"] = ev.skipped;
  body["top_level_accuracy"] =
      top_level_accuracy(ev.predictions, *ctx.verbalizer);
  body["metrics"] = ojson::parse(ev.metrics.to_json());
  write_report(dir / "metrics.json", ctx.echo, "eval", body);
  write_text(dir / "metrics.txt", ctx.echo, ev.metrics.to_table());
  write_text(dir / "confusion.tsv", ctx.echo, ev.metrics.confusion_tsv());

  out << ev.metrics.to_table();
  if (ev.skipped > 0) {
    out << ev.skipped << " instance(s) excluded: no label under "
        << scheme_name(ctx.scheme) << "\n";
  }
  return kExitOk;
}

ojson prediction_json(const RelationInstance& inst, const PredictionRecord& p,
                      const Verbalizer& verbalizer) {
  ojson j;
  j["arg1"] = inst.arg1;
  j["arg2"] = inst.arg2;
  if (inst.connective) j["connective"] = *inst.connective;
  j["predicted_token"] = p.predicted_token;
  j["predicted_label"] =
      p.predicted_label
          ? ojson(verbalizer.scheme().label(*p.predicted_label).name)
          : ojson(nullptr);
  return j;
}

int cmd_predict(const Overrides& o, const std::string& checkpoint,
                const std::optional<std::string>& arg1,
                const std::optional<std::string>& arg2,
                const std::optional<std::string>& connective, std::istream& in,
                std::ostream& out) {
  Context ctx = prepare(effective_config(o));
  auto scorer = make_trained_scorer(ctx.config, checkpoint);
  EvalOptions opt = eval_options(ctx.config);
  auto emit = [&](RelationInstance inst) {
    inst.arg1 = normalize_whitespace(inst.arg1);
    inst.arg2 = normalize_whitespace(inst.arg2);
    auto p = predict(inst, *ctx.tmpl, *ctx.verbalizer, *scorer, opt);
    out << prediction_json(inst, p, *ctx.verbalizer).dump() << "\n";
  };
  if (arg1 || arg2) {
    if (!arg1 || !arg2) throw UsageError("--arg1 and --arg2 go together");
    RelationInstance inst;
    inst.arg1 = *arg1;
    inst.arg2 = *arg2;
    inst.connective = connective;
    emit(std::move(inst));
    return kExitOk;
  }
  // One JSON object per stdin line: {"arg1", "arg2", "connective"?}.
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (normalize_whitespace(line).empty()) continue;
    RelationInstance inst;
    try {
      json j = json::parse(line);
      inst.arg1 = j.at("arg1").get<std::string>();
      inst.arg2 = j.at("arg2").get<std::string>();
      if (j.contains("connective") && !j["connective"].is_null()) {
        inst.connective = j["connective"].get<std::string>();
      }
    } catch (const json::exception& e) {
      throw ParseError(line_no, std::string("stdin: ") + e.what());
    }
    emit(std::move(inst));
  }
  return kExitOk;
}

int cmd_case_study(const Overrides& o, const std::string& checkpoint,
                   const std::string& label, const std::string& split_flag,
                   std::ostream& out) {
  Context ctx = prepare(effective_config(o));
  auto gold = ctx.verbalizer->scheme().index_of(label);
  if (!gold) {
    throw UsageError("label '" + label + "' is not in " +
                     scheme_name(ctx.scheme));
  }
  Split split = parse_eval_split(split_flag);
  std::vector<RelationInstance> selected;
  for (auto& inst : load_split(ctx, split)) {
    if (resolve_gold_index(inst, ctx.scheme) == gold) {
      selected.push_back(std::move(inst));
    }
  }
  auto scorer = make_trained_scorer(ctx.config, checkpoint);
  std::vector<PredictionRecord> preds;
  if (!selected.empty()) {
    preds = evaluate(selected, *ctx.tmpl, *ctx.verbalizer, *scorer,
                     eval_options(ctx.config))
                .predictions;
  }
  auto rows = case_study(preds, *ctx.verbalizer, *gold);
  std::string tsv = case_study_tsv(rows);
  fs::path dir = ensure_output_dir(ctx.config);
  write_text(dir / "case_study.tsv", ctx.echo, tsv);
  out << tsv;
  return kExitOk;
}

int cmd_template_search(const Overrides& o, const std::string& ids_flag,
                        std::ostream& out) {
  Context ctx = prepare(effective_config(o));
  const auto& cfg = ctx.config;
  std::vector<Template> templates;
  if (!ids_flag.empty()) {
    for (const auto& id : split(ids_flag, ',')) {
      std::string trimmed = normalize_whitespace(id);
      if (trimmed.empty()) continue;
      try {
        templates.push_back(find_template(cfg, trimmed));
      } catch (const ArgumentError& e) {
        throw UsageError(std::string("--templates: ") + e.what());
      }
    }
  } else {
    if (cfg.mode == Mode::kPcp) {
      for (const char* id : {"T1", "T2", "T3", "T4", "T5", "T6"}) {
        templates.push_back(builtin_template(id));
      }
    } else {
      templates.push_back(builtin_template(cfg.effective_template_id()));
    }
    if (!cfg.template_file.empty()) {
      for (auto& t : load_template_file(cfg)) templates.push_back(t);
    }
  }
  if (templates.empty()) throw UsageError("no templates to search");
  auto train = load_split(ctx, Split::kTrain);
  auto dev = load_split(ctx, Split::kDev);

  // Remote templates share one sidecar, so each restarts from the snapshot
  // taken before the first fit.
  std::optional<std::string> remote_origin;
  ScorerFactory factory = [&](const Template& tmpl) {
    auto scorer = make_fresh_scorer(cfg, tmpl, train);
    if (cfg.scorer.kind == "remote" && scorer->capabilities().trainable) {
      if (!remote_origin) {
        remote_origin = scorer->save_checkpoint();
      } else {
        scorer->load_checkpoint(*remote_origin);
      }
    }
    return scorer;
  };
  auto rows = template_search(templates, train, dev, *ctx.verbalizer,
                              factory, cfg.train);
  std::string tsv = template_search_tsv(rows);
  fs::path dir = ensure_output_dir(cfg);
  write_text(dir / "template_search.tsv", ctx.echo, tsv);
  out << tsv;
  return kExitOk;
}

int cmd_validate_verbalizer(const Overrides& o, std::ostream& out) {
  Context ctx = prepare(effective_config(o));
  std::unique_ptr<Scorer> scorer =
      make_fresh_scorer(ctx.config, *ctx.tmpl, {});
  ValidationReport report = validate(*ctx.verbalizer, *scorer);
  out << report.to_text();
  return report.ok() ? kExitOk : kExitData;
}

int cmd_induce_verbalizer(const Overrides& o, const InductionParams& params,
                          std::ostream& out) {
  Context ctx = prepare(effective_config(o));
  if (ctx.config.mode != Mode::kPcp) {
    throw UsageError("answer-set induction selects connectives (PCP mode)");
  }
  auto train = load_split(ctx, Split::kTrain);
  auto scorer = make_fresh_scorer(ctx.config, *ctx.tmpl, {});
  InductionResult result =
      induce_answer_sets(train, ctx.scheme, params, *scorer);
  fs::path dir = ensure_output_dir(ctx.config);
  std::string verbalizer = format_verbalizer(result.verbalizer);
  write_text(dir / "verbalizer.tsv", ctx.echo, verbalizer);
  write_text(dir / "connective_frequencies.tsv", ctx.echo,
             result.frequency_tsv());
  out << verbalizer;
  return kExitOk;
}

struct IngestFlags {
  std::string input;
  std::string format;
  std::string dataset;
  std::string scheme;
  std::string out_dir = "pcp-ingest";
};

int cmd_ingest(const IngestFlags& f, std::ostream& out) {
  if (f.format != "normalized" && f.format != "conll16") {
    throw UsageError("unknown format '" + f.format +
                     "' (normalized or conll16)");
  }
  Dataset dataset;
  try {
    dataset = f.dataset.empty()
                  ? (f.format == "conll16" ? Dataset::kConll16 : Dataset::kPdtb)
                  : parse_dataset(f.dataset);
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  std::vector<SchemeId> schemes;
  if (!f.scheme.empty()) {
    try {
      schemes.push_back(parse_scheme(f.scheme));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  } else if (dataset == Dataset::kConll16) {
    schemes = {SchemeId::kConll15};
  } else {
    schemes = {SchemeId::kPdtbTop4, SchemeId::kPdtbSecond11,
               SchemeId::kPdtbTopExplicit, SchemeId::kPdtbSecondExplicit};
  }

  ojson echo;
  echo["command"] = "ingest";
  echo["input"] = f.input;
  echo["format"] = f.format;
  echo["dataset"] = dataset_name(dataset);
  echo["schemes"] = ojson::array();
  for (auto s : schemes) echo["schemes"].push_back(scheme_name(s));
  echo["output_dir"] = f.out_dir;
  std::string echo_text = echo.dump();

  auto all = read_corpus(f.input, f.format);
  std::array<std::vector<RelationInstance>, kNumSplits> by_split;
  for (const auto& inst : all) {
    by_split[static_cast<std::size_t>(assign_split(inst, dataset))].push_back(
        inst);
  }
  fs::path dir(f.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  ojson body;
  ojson split_counts;
  for (std::size_t s = 0; s < kNumSplits; ++s) {
    Split split = static_cast<Split>(s);
    bool always = split == Split::kTrain || split == Split::kDev ||
                  split == Split::kTest;
    if (!always && by_split[s].empty()) continue;
    std::ostringstream os;
    write_normalized(os, by_split[s]);
    write_file((dir / (split_name(split) + ".jsonl")).string(), os.str());
    split_counts[split_name(split)] = by_split[s].size();
  }
  body["records"] = all.size();
  body["splits"] = split_counts;
  body["schemes"] = ojson::array();
  for (auto s : schemes) {
    auto selected = select_for_scheme(all, s);
    CorpusStats stats = corpus_stats(selected, s, dataset);
    std::string file = "stats_" + scheme_name(s) + ".tsv";
    write_text(dir / file, echo_text, stats_tsv(stats));
    ojson entry;
    entry["scheme"] = scheme_name(s);
    entry["participating"] = selected.size();
    entry["excluded_unresolvable"] = stats.unresolved;
    entry["train"] = stats.total(Split::kTrain);
    entry["dev"] = stats.total(Split::kDev);
    entry["test"] = stats.total(Split::kTest);
    if (dataset == Dataset::kConll16) entry["blind"] = stats.total(Split::kBlind);
    entry["stats_file"] = file;
    body["schemes"].push_back(entry);
    out << scheme_name(s) << ": " << selected.size() << " participating, "
        << stats.unresolved << " excluded (no label in scheme)\n";
  }
  write_report(dir / "ingest_report.json", echo_text, "ingest", body);
  out << "wrote " << all.size() << " record(s) to " << dir.string() << "\n";
  return kExitOk;
}

void add_experiment_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "experiment config (JSON)");
  cmd->add_option("-o,--output-dir", o.output_dir, "output directory");
  cmd->add_option("-j,--jobs", o.jobs, "worker threads for scoring")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--mode", o.mode, "PCP, PIDRP or PEDRR");
  cmd->add_option("--scheme", o.scheme, "sense scheme id");
  cmd->add_option("--template", o.template_id, "template id");
  cmd->add_option("--template-file", o.template_file,
                  "file of id<TAB>pattern templates");
  cmd->add_option("--verbalizer", o.verbalizer, "builtin id or file");
  cmd->add_option("--scorer", o.scorer, "mock, reference or remote");
  cmd->add_option("--endpoint", o.endpoint, "sidecar base URL");
}

void add_train_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "shuffle seed");
  cmd->add_option("--lr", o.learning_rate, "learning rate");
  cmd->add_option("--weight-decay", o.weight_decay, "decoupled weight decay");
  cmd->add_option("--label-smoothing", o.label_smoothing, "smoothing in [0,1)");
  cmd->add_option("--batch-size", o.batch_size, "batch size");
  cmd->add_option("--epochs", o.max_epochs, "maximum epochs");
}

}  // namespace

// ---- public --------------------------------------------------------------

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::kPcp: return "PCP";
    case Mode::kPidrp: return "PIDRP";
    case Mode::kPedrr: return "PEDRR";
  }
  return "PCP";
}

Mode parse_mode(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (upper == "PCP") return Mode::kPcp;
  if (upper == "PIDRP") return Mode::kPidrp;
  if (upper == "PEDRR") return Mode::kPedrr;
  throw ArgumentError("unknown mode '" + std::string(name) +
                      "' (PCP, PIDRP or PEDRR)");
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const UsageError*>(&error) ||
      dynamic_cast<const ConfigError*>(&error) ||
      dynamic_cast<const CapabilityError*>(&error)) {
    return kExitUsage;
  }
  if (dynamic_cast<const BackendUnavailable*>(&error) ||
      dynamic_cast<const HandshakeError*>(&error)) {
    return kExitBackend;
  }
  if (dynamic_cast<const Error*>(&error)) return kExitData;
  return kExitFailure;
}

std::string ExperimentConfig::effective_template_id() const {
  if (!template_id.empty()) return template_id;
  switch (mode) {
    case Mode::kPcp: return "T6";
    case Mode::kPidrp: return "PIDRP";
    case Mode::kPedrr: return "PEDRR";
  }
  return "T6";
}

std::string ExperimentConfig::effective_verbalizer() const {
  if (!verbalizer.empty()) return verbalizer;
  switch (mode) {
    case Mode::kPcp: return "pdtb-second";
    case Mode::kPidrp: return "pidrp-top";
    case Mode::kPedrr: return "pedrr-second";
  }
  return "pdtb-second";
}

fs::path ExperimentConfig::resolve(const std::string& path) const {
  fs::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

std::string ExperimentConfig::echo() const {
  ojson j;
  j["mode"] = mode_name(mode);
  j["dataset"] = dataset_name(dataset);
  j["scheme"] = scheme ? ojson(scheme_name(*scheme)) : ojson(nullptr);
  j["data"] = {{"format", data.format},
               {"corpus", data.corpus},
               {"train", data.train},
               {"dev", data.dev},
               {"test", data.test}};
  j["template"] = effective_template_id();
  j["template_file"] = template_file;
  j["verbalizer"] = effective_verbalizer();
  ojson s;
  s["kind"] = scorer.kind;
  if (scorer.kind == "reference") {
    s["seed"] = scorer.reference.seed;
    s["init_scale"] = scorer.reference.init_scale;
    s["window_features"] = scorer.reference.window_features;
    s["idf_weighting"] = scorer.reference.idf_weighting;
    s["min_df"] = scorer.reference.min_df;
  } else if (scorer.kind == "remote") {
    s["endpoint"] = scorer.remote.url;
    s["timeout_ms"] = scorer.remote.timeout_ms;
    s["retries"] = scorer.remote.retries;
  } else {
    s["scores"] = scorer.mock_scores;
    s["default_score"] = scorer.mock_default_score;
  }
  j["scorer"] = s;
  ojson t;
  t["learning_rate"] = train.learning_rate;
  t["weight_decay"] = train.weight_decay;
  t["batch_size"] = train.batch_size;
  t["max_epochs"] = train.max_epochs;
  t["label_smoothing"] = train.label_smoothing;
  t["seed"] = train.seed;
  t["selection_metric"] = selection_metric_name(train.selection_metric);
  j["train"] = t;
  j["eval"] = {{"restrict_to_answers", restrict_to_answers}};
  j["output_dir"] = output_dir;
  j["jobs"] = train.jobs;
  return j.dump();
}

ExperimentConfig parse_experiment_config(std::string_view text,
                                         const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("not valid JSON: ") + e.what()});
  }
  if (!root.is_object()) throw ConfigError({"top level must be an object"});

  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  ConfigReader r;
  r.allow_keys(root, "",
               {"mode", "dataset", "scheme", "data", "template",
                "template_file", "verbalizer", "scorer", "train", "eval",
                "output_dir", "jobs"});
  r.parsed(root, "mode", "", [&](const std::string& s) { cfg.mode = parse_mode(s); });
  r.parsed(root, "dataset", "",
           [&](const std::string& s) { cfg.dataset = parse_dataset(s); });
  r.parsed(root, "scheme", "",
           [&](const std::string& s) { cfg.scheme = parse_scheme(s); });
  r.string(root, "template", "", cfg.template_id);
  r.string(root, "template_file", "", cfg.template_file);
  r.string(root, "verbalizer", "", cfg.verbalizer);
  r.string(root, "output_dir", "", cfg.output_dir);
  r.count(root, "jobs", "", cfg.train.jobs);

  if (r.object(root, "data", "")) {
    const json& d = root["data"];
    r.allow_keys(d, "data.", {"format", "corpus", "train", "dev", "test"});
    r.string(d, "format", "data.", cfg.data.format);
    r.string(d, "corpus", "data.", cfg.data.corpus);
    r.string(d, "train", "data.", cfg.data.train);
    r.string(d, "dev", "data.", cfg.data.dev);
    r.string(d, "test", "data.", cfg.data.test);
  }
  if (r.object(root, "scorer", "")) {
    const json& s = root["scorer"];
    r.allow_keys(s, "scorer.",
                 {"kind", "seed", "init_scale", "window_features",
                  "idf_weighting", "min_df", "endpoint", "timeout_ms",
                  "retries", "scores", "default_score"});
    auto& sc = cfg.scorer;
    r.string(s, "kind", "scorer.", sc.kind);
    r.count(s, "seed", "scorer.", sc.reference.seed);
    r.number(s, "init_scale", "scorer.", sc.reference.init_scale);
    r.boolean(s, "window_features", "scorer.", sc.reference.window_features);
    r.boolean(s, "idf_weighting", "scorer.", sc.reference.idf_weighting);
    r.count(s, "min_df", "scorer.", sc.reference.min_df);
    r.string(s, "endpoint", "scorer.", sc.remote.url);
    r.integer(s, "timeout_ms", "scorer.", sc.remote.timeout_ms);
    r.integer(s, "retries", "scorer.", sc.remote.retries);
    r.number(s, "default_score", "scorer.", sc.mock_default_score);
    if (s.contains("scores")) {
      const json& m = s["scores"];
      bool ok = m.is_object();
      for (const auto& [k, v] : m.items()) ok = ok && v.is_number();
      if (ok) {
        for (const auto& [k, v] : m.items()) sc.mock_scores[k] = v.get<double>();
      } else {
        r.violations.push_back("scorer.scores: expected an object of numbers");
      }
    }
  }
  if (r.object(root, "train", "")) {
    const json& t = root["train"];
    r.allow_keys(t, "train.",
                 {"learning_rate", "weight_decay", "batch_size", "max_epochs",
                  "label_smoothing", "seed", "selection_metric"});
    auto& tc = cfg.train;
    r.number(t, "learning_rate", "train.", tc.learning_rate);
    r.number(t, "weight_decay", "train.", tc.weight_decay);
    r.count(t, "batch_size", "train.", tc.batch_size);
    r.count(t, "max_epochs", "train.", tc.max_epochs);
    r.number(t, "label_smoothing", "train.", tc.label_smoothing);
    r.count(t, "seed", "train.", tc.seed);
    r.parsed(t, "selection_metric", "train.", [&](const std::string& s) {
      tc.selection_metric = parse_selection_metric(s);
    });
  }
  if (r.object(root, "eval", "")) {
    const json& e = root["eval"];
    r.allow_keys(e, "eval.", {"restrict_to_answers"});
    r.boolean(e, "restrict_to_answers", "eval.", cfg.restrict_to_answers);
  }
  for (auto& v : config_violations(cfg)) r.violations.push_back(std::move(v));
  if (!r.violations.empty()) throw ConfigError(r.violations);
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path.string());
  } catch (const IoError& e) {
    throw UsageError(e.what());
  }
  return parse_experiment_config(text, path.parent_path());
}

int run(const std::vector<std::string>& args, std::istream& in,
        std::ostream& out, std::ostream& err) {
  CLI::App app{"Prompt-based connective prediction for discourse relations",
               "pcp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Overrides o;
  std::string checkpoint;
  std::string split_flag = "test";

  IngestFlags ingest;
  auto* c_ingest = app.add_subcommand(
      "ingest", "normalize a corpus into per-split JSON lines and stats");
  c_ingest->add_option("-i,--input", ingest.input, "input file")->required();
  c_ingest->add_option("-f,--format", ingest.format, "normalized or conll16")
      ->required();
  c_ingest->add_option("--dataset", ingest.dataset, "pdtb or conll16");
  c_ingest->add_option("--scheme", ingest.scheme, "only this scheme's stats");
  c_ingest->add_option("-o,--output-dir", ingest.out_dir, "output directory");

  auto* c_train = app.add_subcommand("train", "fit a scorer and keep the "
                                              "best dev checkpoint");
  add_experiment_flags(c_train, o);
  add_train_flags(c_train, o);

  auto* c_eval = app.add_subcommand("eval", "score a split and write metrics");
  add_experiment_flags(c_eval, o);
  c_eval->add_option("--checkpoint", checkpoint, "checkpoint file");
  c_eval->add_option("--split", split_flag, "train, dev or test");
  c_eval->add_flag("--full-vocabulary", o.full_vocabulary,
                   "let non-answer tokens win the argmax");

  std::optional<std::string> arg1, arg2, connective;
  auto* c_predict = app.add_subcommand(
      "predict", "predict one argument pair (flags) or JSON lines on stdin");
  add_experiment_flags(c_predict, o);
  c_predict->add_option("--checkpoint", checkpoint, "checkpoint file");
  c_predict->add_option("--arg1", arg1, "first argument");
  c_predict->add_option("--arg2", arg2, "second argument");
  c_predict->add_option("--connective", connective,
                        "explicit connective (PEDRR)");
  c_predict->add_flag("--full-vocabulary", o.full_vocabulary,
                      "let non-answer tokens win the argmax");

  std::string label;
  auto* c_case = app.add_subcommand(
      "case-study", "tabulate predictions for one gold label");
  add_experiment_flags(c_case, o);
  c_case->add_option("--checkpoint", checkpoint, "checkpoint file");
  c_case->add_option("--label", label, "gold sense label")->required();
  c_case->add_option("--split", split_flag, "train, dev or test");

  std::string template_ids;
  auto* c_search = app.add_subcommand(
      "template-search", "rank templates by dev top-level accuracy");
  add_experiment_flags(c_search, o);
  add_train_flags(c_search, o);
  c_search->add_option("--templates", template_ids,
                       "comma-separated template ids");

  auto* c_validate = app.add_subcommand(
      "validate-verbalizer", "check answer sets for overlaps and "
                             "multi-token words");
  add_experiment_flags(c_validate, o);

  InductionParams params;
  auto* c_induce = app.add_subcommand(
      "induce-verbalizer", "select answer sets from training connectives");
  add_experiment_flags(c_induce, o);
  c_induce->add_option("--max-per-label", params.max_per_label,
                       "answers kept per label");
  c_induce->add_option("--threshold", params.ambiguity_threshold,
                       "minimum majority-label share");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_ingest->parsed()) return cmd_ingest(ingest, out);
    if (c_train->parsed()) return cmd_train(o, out);
    if (c_eval->parsed()) return cmd_eval(o, checkpoint, split_flag, out);
    if (c_predict->parsed()) {
      return cmd_predict(o, checkpoint, arg1, arg2, connective, in, out);
    }
    if (c_case->parsed()) {
      return cmd_case_study(o, checkpoint, label, split_flag, out);
    }
    if (c_search->parsed()) return cmd_template_search(o, template_ids, out);
    if (c_validate->parsed()) return cmd_validate_verbalizer(o, out);
    if (c_induce->parsed()) return cmd_induce_verbalizer(o, params, out);
  } catch (const std::exception& e) {
    err << "pcp: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitUsage;
}

}  // namespace pcp
