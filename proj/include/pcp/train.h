#ifndef PCP_TRAIN_H_
#define PCP_TRAIN_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcp/corpus.h"
#include "pcp/prompt.h"
#include "pcp/scorer.h"
#include "pcp/verbalizer.h"

namespace pcp {

enum class SelectionMetric { kTopLevelDevAccuracy, kSchemeDevAccuracy };

std::string selection_metric_name(SelectionMetric metric);
SelectionMetric parse_selection_metric(std::string_view name);

// Defaults: learning rate 1e-5, decoupled weight decay 1e-4, batch size 4,
// label smoothing 0.05, three epochs.
struct TrainConfig {
  double learning_rate = 1e-5;
  double weight_decay = 1e-4;
  std::size_t batch_size = 4;
  std::size_t max_epochs = 3;
  double label_smoothing = 0.05;
  std::uint64_t seed = 42;
  SelectionMetric selection_metric = SelectionMetric::kTopLevelDevAccuracy;
  std::size_t jobs = 1;  // dev-evaluation workers

  // Every violated constraint, empty when valid.
  std::vector<std::string> violations() const;
  StepOptions step_options() const {
    return {learning_rate, weight_decay, label_smoothing};
  }
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  std::vector<double> batch_losses;
  double dev_metric = 0.0;
  std::string checkpoint;
};

struct TrainRun {
  TrainConfig config;
  std::string template_id;
  std::size_t train_pairs = 0;
  std::size_t skipped = 0;  // train instances unresolvable under the scheme
  double initial_dev_metric = 0.0;
  std::string initial_checkpoint;
  std::vector<EpochRecord> epochs;
  std::size_t selected_epoch = 0;  // 0 means the untrained scorer
  std::string selected_checkpoint;
  double selected_dev_metric = 0.0;

  std::string to_json() const;
};

// Renders the prompt (with the annotated connective when the template has a
// connective slot) and picks the gold answer. Returns nullopt for instances
// unresolvable under the verbalizer's scheme; throws ArgumentError when the
// template needs a connective the instance lacks.
std::optional<TrainingExample> make_training_pair(
    const RelationInstance& instance, const Template& tmpl,
    const Verbalizer& verbalizer, const Placeholders& placeholders = {});

// Seeded shuffle-then-batch fine-tuning with per-epoch dev evaluation. The
// checkpoint with the best dev metric (earliest on ties) is restored before
// returning. With max_epochs = 0 the untrained scorer is selected.
TrainRun fit(std::span<const RelationInstance> train,
             std::span<const RelationInstance> dev, const Template& tmpl,
             const Verbalizer& verbalizer, Scorer& scorer,
             const TrainConfig& config);

}  // namespace pcp

#endif  // PCP_TRAIN_H_
