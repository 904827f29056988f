// Acceptance checks for the primary component. Prints one PASS/FAIL/SKIP
// line per criterion and exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pcp/cli.h"
#include "pcp/corpus.h"
#include "pcp/eval.h"
#include "pcp/loss.h"
#include "pcp/metrics.h"
#include "pcp/prompt.h"
#include "pcp/reference_scorer.h"
#include "pcp/train.h"
#include "pcp/verbalizer.h"
#include "support/oracles.h"
#include "support/synthetic.h"
#include "support/workspace.h"

namespace pcp::acceptance {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  enum Status { kPass, kFail, kSkip } status = kPass;
  std::string detail;
};

Outcome pass(std::string detail) { return {Outcome::kPass, std::move(detail)}; }
Outcome fail(std::string detail) { return {Outcome::kFail, std::move(detail)}; }
Outcome skip(std::string detail) { return {Outcome::kSkip, std::move(detail)}; }

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

Outcome template_goldens() {
  struct Golden {
    const char* id;
    const char* conn;
    const char* text;
  };
  const Golden goldens[] = {
      {"T1", nullptr, "It rained <mask> the game was cancelled."},
      {"T2", nullptr, "It rained. That's <mask> the game was cancelled."},
      {"T3", nullptr,
       "Arg1: It rained. Arg2: the game was cancelled. The connective "
       "between Arg1 and Arg2 is <mask>."},
      {"T4", nullptr,
       "Arg1: It rained. Arg2: the game was cancelled. The conjunction "
       "between Arg1 and Arg2 is <mask>."},
      {"T5", nullptr,
       "Arg1: It rained. Arg2: the game was cancelled.</s></s>The "
       "connective between Arg1 and Arg2 is <mask>."},
      {"T6", nullptr,
       "Arg1: It rained. Arg2: the game was cancelled.</s></s>The "
       "conjunction between Arg1 and Arg2 is <mask>."},
      {"PIDRP", nullptr,
       "Arg1: It rained. Arg2: the game was cancelled. The discourse "
       "relation between Arg1 and Arg2 is <mask>."},
      {"PEDRR", "so",
       "Arg1: It rained. Arg2: the game was cancelled. The connective "
       "between Arg1 and Arg2 is so. In summary, the discourse relation "
       "between Arg1 and Arg2 is <mask>."},
  };
  std::size_t ok = 0;
  std::string first_bad;
  for (const auto& g : goldens) {
    std::optional<std::string_view> conn;
    if (g.conn) conn = g.conn;
    auto p = render(builtin_template(g.id), "It rained",
                    "the game was cancelled", conn);
    if (p.text == g.text) {
      ++ok;
    } else if (first_bad.empty()) {
      first_bad = std::string(g.id) + " rendered '" + p.text + "'";
    }
  }
  std::string detail = std::to_string(ok) + "/8 templates byte-exact";
  return ok == 8 ? pass(detail) : fail(detail + "; " + first_bad);
}

Outcome verbalizer_integrity() {
  ReferenceScorer tokenizer({}, {});
  std::vector<std::string> problems;
  std::size_t words_checked = 0;
  for (const auto& id : builtin_verbalizer_ids()) {
    const Verbalizer& v = builtin_verbalizer(id);
    ValidationReport report = validate(v, tokenizer);
    if (!report.ok()) problems.push_back(id + ": " + report.to_text());
    for (std::size_t i = 0; i < v.sets().size(); ++i) {
      for (const auto& w : v.set(i).answers) {
        ++words_checked;
        if (v.label_of(w).name != v.set(i).label) {
          problems.push_back(id + ": '" + w + "' maps to " + v.label_of(w).name);
        }
      }
    }
  }
  const Verbalizer& second = builtin_verbalizer("pdtb-second");
  auto words = second.candidates();
  if (words.size() != 27) {
    problems.push_back("pdtb-second has " + std::to_string(words.size()) +
                       " answer words, expected 27");
  }
  // The top-level table is the union of its second-level children.
  Verbalizer derived = derive_top_level(second);
  const Verbalizer& top = builtin_verbalizer("pdtb-top");
  for (std::size_t i = 0; i < top.sets().size(); ++i) {
    auto a = top.set(i).answers;
    auto b = derived.set(i).answers;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) problems.push_back("pdtb-top differs from the derived union");
  }
  if (builtin_verbalizer("conll").sets().size() != 15) {
    problems.push_back("conll table does not cover 15 labels");
  }
  std::string detail = std::to_string(builtin_verbalizer_ids().size()) +
                       " tables, " + std::to_string(words_checked) +
                       " words round-tripped, pdtb-second has " +
                       std::to_string(words.size()) + " words";
  return problems.empty() ? pass(detail) : fail(problems.front());
}

Outcome fallback_rule() {
  const Verbalizer& v = builtin_verbalizer("pdtb-second");
  // Off-set connectives: answers of other labels plus words in no set.
  std::vector<std::string> pool = v.candidates();
  for (const char* w : {"thereby", "likewise", "accordingly", "hence",
                        "whereas", "until", "when", "nor"}) {
    pool.push_back(w);
  }
  std::size_t cases = 0, ok = 0;
  std::string first_bad;
  for (std::size_t k = 0; cases < 50; ++k) {
    std::size_t label = k % v.sets().size();
    const std::string& conn = pool[(k * 7 + 3) % pool.size()];
    if (v.contains(label, conn)) continue;
    RelationInstance r;
    r.doc_id = "wsj_0300";
    r.section = 3;
    r.arg1 = "A";
    r.arg2 = "B";
    r.connective = conn;
    r.senses = {v.set(label).label};
    ++cases;
    std::string got = gold_answer(r, v, label);
    if (got == v.set(label).answers.front()) {
      ++ok;
    } else if (first_bad.empty()) {
      first_bad = v.set(label).label + " with '" + conn + "' gave '" + got + "'";
    }
  }
  std::string detail = std::to_string(ok) + "/" + std::to_string(cases) +
                       " cases use the first answer";
  return ok == cases ? pass(detail) : fail(detail + "; " + first_bad);
}

Outcome loss_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> score(-20.0, 20.0);
  std::uniform_real_distribution<double> eps_dist(0.0, 0.5);
  double worst = 0.0;
  for (int c = 0; c < 1000; ++c) {
    std::size_t k = 2 + rng() % 26;
    std::vector<double> s(k);
    for (auto& x : s) x = score(rng);
    std::size_t gold = rng() % k;
    double eps = c % 10 == 0 ? 0.0 : eps_dist(rng);
    double got = smoothed_cross_entropy(s, gold, eps);
    double want = testing::smoothed_ce_oracle(s, gold, eps);
    worst = std::max(worst, std::abs(got - want));
  }
  bool exact = true;
  for (std::size_t k : {2u, 4u, 11u, 15u, 27u}) {
    std::vector<double> uniform(k, 0.37);
    if (smoothed_cross_entropy(uniform, 0, 0.0) != std::log(double(k))) {
      exact = false;
    }
  }
  std::string detail = "max |diff| " + num(worst) + " over 1000 cases, ln K " +
                       (exact ? "exact" : "inexact");
  return worst <= 1e-9 && exact ? pass(detail) : fail(detail);
}

Outcome gradient_check() {
  std::mt19937_64 rng(99);
  const char* pool[] = {"rain", "sun",   "sales", "rose", "fell", "team",
                        "won",  "lost",  "prices", "costs", "grew", "quiet"};
  const std::vector<std::string> cands = {"because", "but", "and"};
  const Template& t6 = builtin_template("T6");
  double worst = 0.0;
  std::size_t params = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TrainingExample> batch;
    std::vector<std::string> texts;
    for (int i = 0; i < 3; ++i) {
      std::string a1 = std::string(pool[rng() % 12]) + " " + pool[rng() % 12];
      std::string a2 = std::string(pool[rng() % 12]) + " " + pool[rng() % 12];
      auto p = render(t6, a1, a2);
      texts.push_back(p.text);
      batch.push_back({p, cands[rng() % cands.size()]});
    }
    ReferenceScorerConfig config;
    config.seed = 100 + trial;
    config.init_scale = 0.5;
    ReferenceScorer scorer(config, texts);
    const double eps = 0.05;
    auto grad = scorer.gradient(batch, cands, eps);
    for (const auto& cand : cands) {
      for (std::size_t f = 0; f < scorer.features().size(); ++f) {
        const double w = scorer.weight(cand, f);
        const double h = 1e-5;
        scorer.set_weight(cand, f, w + h);
        double up = scorer.batch_loss(batch, cands, eps);
        scorer.set_weight(cand, f, w - h);
        double down = scorer.batch_loss(batch, cands, eps);
        scorer.set_weight(cand, f, w);
        double fd = (up - down) / (2 * h);
        double g = grad.at(cand)[f];
        double denom = std::max({std::abs(g), std::abs(fd), 1e-8});
        worst = std::max(worst, std::abs(g - fd) / denom);
        ++params;
      }
    }
  }
  std::string detail = "max relative error " + num(worst) + " over " +
                       std::to_string(params) + " parameters, 20 instances";
  return worst <= 1e-4 ? pass(detail) : fail(detail);
}

Outcome metric_oracle() {
  std::mt19937_64 rng(31337);
  double worst = 0.0;
  for (int set = 0; set < 1000; ++set) {
    std::size_t labels = 2 + rng() % 14;
    std::size_t n = 1 + rng() % 500;
    std::vector<std::size_t> gold(n);
    std::vector<std::optional<std::size_t>> pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = rng() % labels;
      if (rng() % 20 == 0) continue;  // unmapped prediction
      pred[i] = rng() % 3 == 0 ? gold[i] : rng() % labels;
    }
    std::vector<std::string> names;
    for (std::size_t l = 0; l < labels; ++l) names.push_back("L" + std::to_string(l));
    MetricsReport got = compute_metrics(gold, pred, names);
    auto want = testing::metrics_oracle(gold, pred, labels);
    worst = std::max(worst, std::abs(got.accuracy - want.accuracy));
    worst = std::max(worst, std::abs(got.macro_f1 - want.macro_f1));
    for (std::size_t l = 0; l < labels; ++l) {
      worst = std::max(worst, std::abs(got.f1[l] - want.f1[l]));
    }
  }
  std::string detail = "max |diff| " + num(worst) + " over 1000 sets";
  return worst <= 1e-9 ? pass(detail) : fail(detail);
}

Outcome end_to_end_synthetic() {
  auto corpus = testing::synthetic_corpus();
  auto train = testing::in_split(corpus, Split::kTrain);
  auto dev = testing::in_split(corpus, Split::kDev);
  auto test = testing::in_split(corpus, Split::kTest);
  const Template& tmpl = builtin_template("T6");
  const Verbalizer& v = builtin_verbalizer("pdtb-second");
  std::vector<std::string> texts;
  for (const auto& inst : train) texts.push_back(render_instance(inst, tmpl).text);
  ReferenceScorer scorer({}, texts);
  TrainConfig config;
  TrainRun run = fit(train, dev, tmpl, v, scorer, config);

  double best = run.initial_dev_metric;
  std::size_t best_epoch = 0;
  for (const auto& e : run.epochs) {
    if (e.dev_metric > best) {
      best = e.dev_metric;
      best_epoch = e.epoch;
    }
  }
  double restored =
      selection_score(evaluate(dev, tmpl, v, scorer), v, config.selection_metric);
  Evaluation held_out = evaluate(test, tmpl, v, scorer);
  std::string detail =
      std::to_string(corpus.size()) + " instances, held-out accuracy " +
      num(held_out.metrics.accuracy) + ", selected epoch " +
      std::to_string(run.selected_epoch) + ", dev-best epoch " +
      std::to_string(best_epoch);
  bool ok = held_out.metrics.accuracy >= 0.95 &&
            run.selected_epoch == best_epoch && restored == best;
  return ok ? pass(detail) : fail(detail);
}

// Report bytes with the metadata timestamp removed.
std::string without_timestamp(const std::string& text) {
  std::string out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find("\"timestamp\":") != std::string::npos) continue;
    out += line + "\n";
  }
  return out;
}

Outcome determinism() {
  testing::TempDir tmp;
  fs::path config = testing::write_synthetic_experiment(tmp.path());
  const std::vector<std::string> artifacts = {
      "checkpoint.json", "train_report.json", "metrics.json", "metrics.txt",
      "confusion.tsv"};
  std::vector<std::vector<std::string>> runs;
  for (int r = 0; r < 2; ++r) {
    for (const char* cmd : {"train", "eval"}) {
      auto res = testing::run_cli({cmd, "-c", config.string()});
      if (res.code != 0) {
        return fail(std::string(cmd) + " exited " + std::to_string(res.code) +
                    ": " + res.err);
      }
    }
    std::vector<std::string> files;
    for (const auto& a : artifacts) {
      files.push_back(testing::read_text_file(tmp / ("out/" + a)));
    }
    runs.push_back(std::move(files));
  }
  for (std::size_t i = 0; i < artifacts.size(); ++i) {
    if (without_timestamp(runs[0][i]) != without_timestamp(runs[1][i])) {
      return fail(artifacts[i] + " differs between runs");
    }
  }
  return pass(std::to_string(artifacts.size()) +
              " artifacts identical across two train+eval runs");
}

std::vector<RelationInstance> read_normalized_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_normalized(in);
}

Outcome real_data_statistics() {
  const char* pdtb = std::getenv("PCP_PDTB_NORMALIZED");
  const char* conll = std::getenv("PCP_CONLL16_RELATIONS");
  if ((!pdtb || !*pdtb) && (!conll || !*conll)) {
    return skip("set PCP_PDTB_NORMALIZED and/or PCP_CONLL16_RELATIONS");
  }
  std::vector<std::string> notes;
  bool ok = true;
  if (pdtb && *pdtb) {
    auto all = read_normalized_file(pdtb);
    struct Expected {
      SchemeId scheme;
      std::size_t train, dev, test;
    };
    for (const Expected& e :
         {Expected{SchemeId::kPdtbTop4, 12632, 1183, 1046},
          Expected{SchemeId::kPdtbSecond11, 12406, 1165, 1039}}) {
      auto stats = corpus_stats(select_for_scheme(all, e.scheme), e.scheme,
                                Dataset::kPdtb);
      std::size_t tr = stats.total(Split::kTrain), dv = stats.total(Split::kDev),
                  te = stats.total(Split::kTest);
      ok = ok && tr == e.train && dv == e.dev && te == e.test;
      notes.push_back(scheme_name(e.scheme) + " " + std::to_string(tr) + "/" +
                      std::to_string(dv) + "/" + std::to_string(te));
    }
  }
  if (conll && *conll) {
    std::vector<RelationInstance> all;
    std::istringstream paths(conll);
    std::string path;
    while (std::getline(paths, path, ':')) {
      std::ifstream in(path);
      if (!in) throw std::runtime_error("cannot open " + path);
      for (auto& r : parse_conll16(in)) all.push_back(std::move(r));
    }
    std::vector<bool> seen(scheme(SchemeId::kConll15).size(), false);
    for (const auto& r : select_for_scheme(all, SchemeId::kConll15)) {
      if (auto g = resolve_gold_index(r, SchemeId::kConll15)) seen[*g] = true;
    }
    auto labels = std::count(seen.begin(), seen.end(), true);
    ok = ok && labels == 15;
    notes.push_back("CoNLL16 resolvable labels " + std::to_string(labels));
  }
  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : ", ") + n;
  return ok ? pass(detail) : fail(detail);
}

}  // namespace
}  // namespace pcp::acceptance

int main() {
  using namespace pcp::acceptance;
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"template-golden-strings", template_goldens},
      {"verbalizer-integrity", verbalizer_integrity},
      {"fallback-rule", fallback_rule},
      {"loss-oracle", loss_oracle},
      {"gradient-check", gradient_check},
      {"metric-oracle", metric_oracle},
      {"end-to-end-synthetic", end_to_end_synthetic},
      {"determinism", determinism},
      {"real-data-statistics", real_data_statistics},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = fail(std::string("threw: ") + e.what());
    }
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    const char* tag = o.status == Outcome::kPass   ? "PASS"
                      : o.status == Outcome::kFail ? "FAIL"
                                                   : "SKIP";
    if (o.status == Outcome::kFail) ++failures;
    std::printf("%s %s: %s [%.2fs]\n", tag, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
