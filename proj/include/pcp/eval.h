#ifndef PCP_EVAL_H_
#define PCP_EVAL_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcp/corpus.h"
#include "pcp/metrics.h"
#include "pcp/prompt.h"
#include "pcp/scorer.h"
#include "pcp/train.h"
#include "pcp/verbalizer.h"

namespace pcp {

struct EvalOptions {
  // Restrict the argmax to the answer vocabulary. When false, the scorer's
  // full output vocabulary competes too and a non-answer winner stays
  // unmapped (counted wrong).
  bool restrict_to_answers = true;
  std::size_t jobs = 1;
  bool keep_scores = false;
};

struct PredictionRecord {
  std::size_t instance_index = 0;
  std::string doc_id;
  std::string predicted_token;
  std::optional<std::size_t> predicted_label;  // index into the scheme
  std::optional<std::size_t> gold_label;
  std::optional<ScoreVector> scores;
};

// Renders with the instance's connective iff the template has a connective
// slot (ArgumentError when it is missing).
RenderedPrompt render_instance(const RelationInstance& instance,
                               const Template& tmpl,
                               const Placeholders& placeholders = {});

// Argmax over the candidate answers; ties go to the earlier candidate in
// scheme label order, then answer-set order.
PredictionRecord predict(const RelationInstance& instance,
                         const Template& tmpl, const Verbalizer& verbalizer,
                         const Scorer& scorer, const EvalOptions& options = {});

struct Evaluation {
  std::vector<PredictionRecord> predictions;
  MetricsReport metrics;
  std::size_t skipped = 0;  // instances unresolvable under the scheme
};

// Predicts every resolvable instance (fanning out over `options.jobs`
// workers) and scores them. ArgumentError when nothing is resolvable.
Evaluation evaluate(std::span<const RelationInstance> instances,
                    const Template& tmpl, const Verbalizer& verbalizer,
                    const Scorer& scorer, const EvalOptions& options = {});

// Accuracy after projecting gold and predicted labels to their top-level
// class.
double top_level_accuracy(std::span<const PredictionRecord> predictions,
                          const Verbalizer& verbalizer);
double selection_score(const Evaluation& evaluation,
                       const Verbalizer& verbalizer, SelectionMetric metric);

struct CaseStudyRow {
  std::string mapped_label;  // "(unmapped)" for non-answer predictions
  std::string connective;
  std::size_t count = 0;
};

// Predicted (label, connective) pairs among the records whose gold label is
// `gold_label`, by count descending.
std::vector<CaseStudyRow> case_study(
    std::span<const PredictionRecord> predictions,
    const Verbalizer& verbalizer, std::size_t gold_label);
std::string case_study_tsv(std::span<const CaseStudyRow> rows);

struct TemplateSearchRow {
  std::string template_id;
  std::optional<double> accuracy;  // dev top-level accuracy
  std::string note;                // failure message, empty on success
};

using ScorerFactory =
    std::function<std::unique_ptr<Scorer>(const Template& tmpl)>;

// Fits a fresh scorer per template under identical config and ranks the
// templates by dev top-level accuracy (ties by id, failures last).
// Non-trainable scorers are evaluated without fitting.
std::vector<TemplateSearchRow> template_search(
    std::span<const Template> templates,
    std::span<const RelationInstance> train,
    std::span<const RelationInstance> dev, const Verbalizer& verbalizer,
    const ScorerFactory& scorer_factory, const TrainConfig& config);
std::string template_search_tsv(std::span<const TemplateSearchRow> rows);

}  // namespace pcp

#endif  // PCP_EVAL_H_
