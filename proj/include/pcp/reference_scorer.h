#ifndef PCP_REFERENCE_SCORER_H_
#define PCP_REFERENCE_SCORER_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pcp/scorer.h"

namespace pcp {

struct ReferenceScorerConfig {
  std::uint64_t seed = 13;
  // Weights start at zero unless init_scale > 0, in which case they are
  // drawn uniformly from [-init_scale, init_scale) per (seed, candidate).
  double init_scale = 0.0;
  // Adds "L:<tok>" / "R:<tok>" features for the tokens next to the mask.
  bool window_features = true;
  // Scales counts by ln(N / df); features present in every training text
  // (template literals, fixed mask neighbours) drop out of the vocabulary.
  bool idf_weighting = true;
  std::size_t min_df = 1;
};

// Desk-scale stand-in for a pretrained masked LM: lowercase bag-of-words
// features of the whole prompt, a linear map to per-candidate scores, and
// plain gradient descent with decoupled weight decay. No bias terms.
class ReferenceScorer : public Scorer {
 public:
  using Gradient = std::map<std::string, std::vector<double>>;
  using SparseFeatures = std::vector<std::pair<std::size_t, double>>;

  // Builds the feature vocabulary from `corpus` (typically the rendered
  // training prompts).
  ReferenceScorer(ReferenceScorerConfig config,
                  std::span<const std::string> corpus);

  static std::vector<std::string> tokenize_text(std::string_view text,
                                                const Placeholders& ph = {});
  // Raw (unweighted) feature counts of one text.
  static std::map<std::string, double> extract_features(
      std::string_view text, bool window_features = true,
      const Placeholders& ph = {});

  ScorerCapabilities capabilities() const override;
  std::vector<std::string> tokenize(std::string_view text) const override;
  ScoreVector score_mask(
      const RenderedPrompt& prompt,
      std::span<const std::string> candidates) const override;
  double train_step(std::span<const TrainingExample> batch,
                    std::span<const std::string> candidates,
                    const StepOptions& options) override;
  std::string save_checkpoint() override;
  void load_checkpoint(const std::string& id) override;
  std::vector<std::string> output_vocabulary() const override;

  const ReferenceScorerConfig& config() const { return config_; }
  const std::vector<std::string>& features() const { return features_; }
  // In-vocabulary features of `text`, weighted; OOV features are dropped.
  SparseFeatures featurize(std::string_view text) const;

  double weight(const std::string& candidate, std::size_t feature) const;
  void set_weight(const std::string& candidate, std::size_t feature,
                  double value);

  // Batch-mean smoothed cross-entropy and its gradient with respect to the
  // weights (weight decay is not part of the objective).
  double batch_loss(std::span<const TrainingExample> batch,
                    std::span<const std::string> candidates,
                    double epsilon) const;
  Gradient gradient(std::span<const TrainingExample> batch,
                    std::span<const std::string> candidates,
                    double epsilon) const;

  // Versioned JSON parameter dump with the embedded feature vocabulary.
  std::string to_json() const;
  static ReferenceScorer from_json(std::string_view text);
  void save(const std::string& path) const;
  static ReferenceScorer load(const std::string& path);

 private:
  // The stored weights are scale * values, which makes weight decay O(1)
  // per step.
  struct Row {
    double scale = 1.0;
    std::vector<double> values;
  };
  using Weights = std::map<std::string, Row>;

  ReferenceScorer() = default;
  std::vector<double> initial_row(const std::string& candidate) const;
  Row& row(const std::string& candidate);
  double score(const SparseFeatures& x, const std::string& candidate) const;
  std::vector<double> logits(const SparseFeatures& x,
                             std::span<const std::string> candidates) const;
  void check_training_batch(std::span<const TrainingExample> batch,
                            std::span<const std::string> candidates) const;

  ReferenceScorerConfig config_;
  std::vector<std::string> features_;
  std::map<std::string, std::size_t> feature_index_;
  std::vector<double> idf_;
  Weights weights_;
  std::map<std::string, Weights> snapshots_;
  std::size_t next_snapshot_ = 0;
};

}  // namespace pcp

#endif  // PCP_REFERENCE_SCORER_H_
