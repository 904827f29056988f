#include "pcp/eval.h"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <map>
#include <set>
#include <thread>

#include "pcp/error.h"

namespace pcp {
namespace {

constexpr std::size_t kScoreChunk = 16;

std::vector<std::string> candidate_list(const Verbalizer& verbalizer,
                                        const Scorer& scorer,
                                        const EvalOptions& options) {
  auto cands = verbalizer.candidates();
  if (options.restrict_to_answers) return cands;
  std::set<std::string> seen(cands.begin(), cands.end());
  for (auto& tok : scorer.output_vocabulary()) {
    if (seen.insert(tok).second) cands.push_back(std::move(tok));
  }
  return cands;
}

PredictionRecord to_record(ScoreVector sv, const Verbalizer& verbalizer,
                           const EvalOptions& options) {
  PredictionRecord rec;
  rec.predicted_token = sv.tokens[sv.argmax()];
  try {
    rec.predicted_label = verbalizer.label_index_of(rec.predicted_token);
  } catch (const UnmappedAnswerError&) {
    rec.predicted_label.reset();
  }
  if (options.keep_scores) rec.scores = std::move(sv);
  return rec;
}

// Scores `prompts` in chunks spread over worker threads; output order
// matches input order.
std::vector<ScoreVector> score_all(const std::vector<RenderedPrompt>& prompts,
                                   const std::vector<std::string>& candidates,
                                   const Scorer& scorer, std::size_t jobs) {
  std::vector<ScoreVector> out(prompts.size());
  const std::size_t chunks = (prompts.size() + kScoreChunk - 1) / kScoreChunk;
  auto work = [&](std::size_t worker, std::size_t workers) {
    for (std::size_t c = worker; c < chunks; c += workers) {
      std::size_t begin = c * kScoreChunk;
      std::size_t end = std::min(prompts.size(), begin + kScoreChunk);
      auto scored = scorer.score_batch(
          std::span<const RenderedPrompt>(prompts).subspan(begin, end - begin),
          candidates);
      for (std::size_t i = begin; i < end; ++i) {
        out[i] = std::move(scored[i - begin]);
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, chunks));
  if (workers == 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        work(w, workers);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

}  // namespace

RenderedPrompt render_instance(const RelationInstance& instance,
                               const Template& tmpl,
                               const Placeholders& placeholders) {
  std::optional<std::string_view> conn;
  if (tmpl.requires_connective()) {
    if (!instance.connective) {
      throw ArgumentError("template '" + tmpl.id() +
                          "' needs a connective but instance from '" +
                          instance.doc_id + "' has none");
    }
    conn = *instance.connective;
  }
  RenderedPrompt p =
      render(tmpl, instance.arg1, instance.arg2, conn, placeholders);
  p.source = instance.doc_id;
  return p;
}

PredictionRecord predict(const RelationInstance& instance,
                         const Template& tmpl, const Verbalizer& verbalizer,
                         const Scorer& scorer, const EvalOptions& options) {
  auto prompt = render_instance(instance, tmpl, scorer.placeholders());
  auto cands = candidate_list(verbalizer, scorer, options);
  PredictionRecord rec =
      to_record(scorer.score_mask(prompt, cands), verbalizer, options);
  rec.doc_id = instance.doc_id;
  rec.gold_label = resolve_gold_index(instance, verbalizer.scheme_id());
  return rec;
}

Evaluation evaluate(std::span<const RelationInstance> instances,
                    const Template& tmpl, const Verbalizer& verbalizer,
                    const Scorer& scorer, const EvalOptions& options) {
  Evaluation ev;
  const Placeholders ph = scorer.placeholders();
  std::vector<RenderedPrompt> prompts;
  std::vector<std::size_t> gold;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    auto g = resolve_gold_index(instances[i], verbalizer.scheme_id());
    if (!g) {
      ++ev.skipped;
      continue;
    }
    prompts.push_back(render_instance(instances[i], tmpl, ph));
    gold.push_back(*g);
    index.push_back(i);
  }
  if (prompts.empty()) {
    throw ArgumentError("no instance is resolvable under " +
                        scheme_name(verbalizer.scheme_id()));
  }
  auto cands = candidate_list(verbalizer, scorer, options);
  auto scores = score_all(prompts, cands, scorer, options.jobs);
  std::vector<std::optional<std::size_t>> pred;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    PredictionRecord rec = to_record(std::move(scores[k]), verbalizer, options);
    rec.instance_index = index[k];
    rec.doc_id = instances[index[k]].doc_id;
    rec.gold_label = gold[k];
    pred.push_back(rec.predicted_label);
    ev.predictions.push_back(std::move(rec));
  }
  std::vector<std::string> labels;
  for (const auto& l : verbalizer.scheme().labels()) labels.push_back(l.name);
  ev.metrics = compute_metrics(gold, pred, std::move(labels));
  return ev;
}

double top_level_accuracy(std::span<const PredictionRecord> predictions,
                          const Verbalizer& verbalizer) {
  std::size_t n = 0, correct = 0;
  const SenseScheme& s = verbalizer.scheme();
  for (const auto& p : predictions) {
    if (!p.gold_label) continue;
    ++n;
    if (p.predicted_label &&
        top_level_name(s.label(*p.predicted_label).name) ==
            top_level_name(s.label(*p.gold_label).name)) {
      ++correct;
    }
  }
  return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
}

double selection_score(const Evaluation& evaluation,
                       const Verbalizer& verbalizer, SelectionMetric metric) {
  if (metric == SelectionMetric::kSchemeDevAccuracy) {
    return evaluation.metrics.accuracy;
  }
  return top_level_accuracy(evaluation.predictions, verbalizer);
}

std::vector<CaseStudyRow> case_study(
    std::span<const PredictionRecord> predictions,
    const Verbalizer& verbalizer, std::size_t gold_label) {
  // (label index or npos for unmapped, connective) -> count
  constexpr std::size_t kUnmapped = static_cast<std::size_t>(-1);
  std::map<std::pair<std::size_t, std::string>, std::size_t> counts;
  for (const auto& p : predictions) {
    if (p.gold_label != gold_label) continue;
    ++counts[{p.predicted_label.value_or(kUnmapped), p.predicted_token}];
  }
  std::vector<std::pair<std::pair<std::size_t, std::string>, std::size_t>>
      entries(counts.begin(), counts.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<CaseStudyRow> rows;
  for (const auto& [key, count] : entries) {
    rows.push_back({key.first == kUnmapped
                        ? std::string("(unmapped)")
                        : verbalizer.scheme().label(key.first).name,
                    key.second, count});
  }
  return rows;
}

std::string case_study_tsv(std::span<const CaseStudyRow> rows) {
  std::string out = "mapped_label\tconnective\tcount\n";
  for (const auto& r : rows) {
    out += r.mapped_label + "\t" + r.connective + "\t" +
           std::to_string(r.count) + "\n";
  }
  return out;
}

std::vector<TemplateSearchRow> template_search(
    std::span<const Template> templates,
    std::span<const RelationInstance> train,
    std::span<const RelationInstance> dev, const Verbalizer& verbalizer,
    const ScorerFactory& scorer_factory, const TrainConfig& config) {
  std::vector<TemplateSearchRow> rows;
  EvalOptions options;
  options.jobs = config.jobs;
  for (const auto& tmpl : templates) {
    TemplateSearchRow row{tmpl.id(), std::nullopt, ""};
    try {
      auto scorer = scorer_factory(tmpl);
      if (scorer->capabilities().trainable) {
        fit(train, dev, tmpl, verbalizer, *scorer, config);
      }
      Evaluation ev = evaluate(dev, tmpl, verbalizer, *scorer, options);
      row.accuracy = top_level_accuracy(ev.predictions, verbalizer);
    } catch (const std::exception& e) {
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const TemplateSearchRow& a, const TemplateSearchRow& b) {
                     if (a.accuracy.has_value() != b.accuracy.has_value()) {
                       return a.accuracy.has_value();
                     }
                     if (a.accuracy && *a.accuracy != *b.accuracy) {
                       return *a.accuracy > *b.accuracy;
                     }
                     return a.template_id < b.template_id;
                   });
  return rows;
}

std::string template_search_tsv(std::span<const TemplateSearchRow> rows) {
  std::string out = "rank\ttemplate_id\tdev_top_level_accuracy\tnote\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::string note = r.note;
    std::replace(note.begin(), note.end(), '\t', ' ');
    std::replace(note.begin(), note.end(), '\n', ' ');
    out += std::to_string(i + 1) + "\t" + r.template_id + "\t" +
           (r.accuracy ? percent(*r.accuracy) : std::string("-")) + "\t" +
           note + "\n";
  }
  return out;
}

}  // namespace pcp
