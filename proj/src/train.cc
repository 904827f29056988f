#include "pcp/train.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "json.hpp"
#include "pcp/error.h"
#include "pcp/eval.h"

namespace pcp {

std::string selection_metric_name(SelectionMetric metric) {
  return metric == SelectionMetric::kTopLevelDevAccuracy
             ? "TopLevelDevAccuracy"
             : "SchemeDevAccuracy";
}

SelectionMetric parse_selection_metric(std::string_view name) {
  if (name == "TopLevelDevAccuracy") return SelectionMetric::kTopLevelDevAccuracy;
  if (name == "SchemeDevAccuracy") return SelectionMetric::kSchemeDevAccuracy;
  throw ArgumentError("unknown selection metric '" + std::string(name) + "'");
}

std::vector<std::string> TrainConfig::violations() const {
  std::vector<std::string> v;
  if (!(learning_rate > 0.0)) v.push_back("learning_rate must be positive");
  if (!(weight_decay >= 0.0)) v.push_back("weight_decay must be non-negative");
  if (batch_size == 0) v.push_back("batch_size must be positive");
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) {
    v.push_back("label_smoothing must lie in [0, 1)");
  }
  if (jobs == 0) v.push_back("jobs must be positive");
  return v;
}

std::string TrainRun::to_json() const {
  nlohmann::ordered_json j;
  j["config"] = {{"learning_rate", config.learning_rate},
                 {"weight_decay", config.weight_decay},
                 {"batch_size", config.batch_size},
                 {"max_epochs", config.max_epochs},
                 {"label_smoothing", config.label_smoothing},
                 {"seed", config.seed},
                 {"selection_metric",
                  selection_metric_name(config.selection_metric)}};
  j["template_id"] = template_id;
  j["train_pairs"] = train_pairs;
  j["skipped"] = skipped;
  j["initial_dev_metric"] = initial_dev_metric;
  nlohmann::ordered_json epochs_json = nlohmann::ordered_json::array();
  for (const auto& e : epochs) {
    epochs_json.push_back({{"epoch", e.epoch},
                           {"mean_loss", e.mean_loss},
                           {"dev_metric", e.dev_metric},
                           {"checkpoint", e.checkpoint},
                           {"batch_losses", e.batch_losses}});
  }
  j["epochs"] = std::move(epochs_json);
  j["selected_epoch"] = selected_epoch;
  j["selected_checkpoint"] = selected_checkpoint;
  j["selected_dev_metric"] = selected_dev_metric;
  return j.dump(2);
}

std::optional<TrainingExample> make_training_pair(
    const RelationInstance& instance, const Template& tmpl,
    const Verbalizer& verbalizer, const Placeholders& placeholders) {
  auto gold = resolve_gold_index(instance, verbalizer.scheme_id());
  if (!gold) return std::nullopt;
  return TrainingExample{render_instance(instance, tmpl, placeholders),
                         gold_answer(instance, verbalizer, *gold)};
}

TrainRun fit(std::span<const RelationInstance> train,
             std::span<const RelationInstance> dev, const Template& tmpl,
             const Verbalizer& verbalizer, Scorer& scorer,
             const TrainConfig& config) {
  if (auto v = config.violations(); !v.empty()) throw ConfigError(v);
  if (!scorer.capabilities().trainable) {
    throw CapabilityError("fit needs a trainable scorer");
  }
  const Placeholders ph = scorer.placeholders();
  TrainRun run;
  run.config = config;
  run.template_id = tmpl.id();
  std::vector<TrainingExample> pairs;
  for (const auto& r : train) {
    if (auto p = make_training_pair(r, tmpl, verbalizer, ph)) {
      pairs.push_back(std::move(*p));
    } else {
      ++run.skipped;
    }
  }
  if (pairs.empty()) throw ArgumentError("no resolvable training instances");
  run.train_pairs = pairs.size();
  const auto candidates = verbalizer.candidates();

  EvalOptions eval_options;
  eval_options.jobs = config.jobs;
  auto dev_metric = [&] {
    Evaluation e = evaluate(dev, tmpl, verbalizer, scorer, eval_options);
    return selection_score(e, verbalizer, config.selection_metric);
  };

  run.initial_dev_metric = dev_metric();
  run.initial_checkpoint = scorer.save_checkpoint();
  run.selected_checkpoint = run.initial_checkpoint;
  run.selected_dev_metric = run.initial_dev_metric;

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(pairs.size());
  std::vector<TrainingExample> batch;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(pairs[order[i]]);
      rec.batch_losses.push_back(
          scorer.train_step(batch, candidates, config.step_options()));
    }
    rec.mean_loss =
        std::accumulate(rec.batch_losses.begin(), rec.batch_losses.end(), 0.0) /
        static_cast<double>(rec.batch_losses.size());
    rec.dev_metric = dev_metric();
    rec.checkpoint = scorer.save_checkpoint();
    if (run.selected_epoch == 0 || rec.dev_metric > run.selected_dev_metric) {
      run.selected_epoch = epoch;
      run.selected_checkpoint = rec.checkpoint;
      run.selected_dev_metric = rec.dev_metric;
    }
    run.epochs.push_back(std::move(rec));
  }
  scorer.load_checkpoint(run.selected_checkpoint);
  return run;
}

}  // namespace pcp
