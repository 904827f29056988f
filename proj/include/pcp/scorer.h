#ifndef PCP_SCORER_H_
#define PCP_SCORER_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcp/prompt.h"

namespace pcp {

// Pre-softmax scores at the mask position, restricted to the requested
// candidates and kept in request order.
struct ScoreVector {
  std::vector<std::string> tokens;
  std::vector<double> scores;

  std::size_t size() const { return tokens.size(); }
  // Throws ContractError for a token that was not requested.
  double at(std::string_view token) const;
  std::size_t index_of(std::string_view token) const;
  // First maximal element, so earlier candidates win ties.
  std::size_t argmax() const;
};

struct ScorerCapabilities {
  bool trainable = false;
  bool deterministic = true;
  std::string tokenizer_kind;
};

struct TrainingExample {
  RenderedPrompt prompt;
  std::string gold;  // answer token
};

struct StepOptions {
  double learning_rate = 1e-5;
  double weight_decay = 1e-4;
  double label_smoothing = 0.05;
};

// A masked-language-model backend. score_mask() and the other const members
// are safe to call concurrently; train_step(), save_checkpoint() and
// load_checkpoint() need exclusive access.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual ScorerCapabilities capabilities() const = 0;
  virtual Placeholders placeholders() const { return {}; }
  virtual std::vector<std::string> tokenize(std::string_view text) const = 0;

  // Whether each word is a single token in prompt context (preceded by a
  // space). The default tokenizes " " + word.
  virtual std::vector<bool> single_token(
      std::span<const std::string> words) const;

  // Throws ContractError when the prompt lacks exactly one mask, when
  // `candidates` is empty or a candidate is not a single token.
  virtual ScoreVector score_mask(
      const RenderedPrompt& prompt,
      std::span<const std::string> candidates) const = 0;
  virtual std::vector<ScoreVector> score_batch(
      std::span<const RenderedPrompt> prompts,
      std::span<const std::string> candidates) const;

  // One optimizer step on the batch-mean smoothed cross-entropy over
  // `candidates`; returns the loss before the update. Non-trainable scorers
  // throw CapabilityError.
  virtual double train_step(std::span<const TrainingExample> batch,
                            std::span<const std::string> candidates,
                            const StepOptions& options);

  // Snapshot/restore of the trainable state, used for checkpoint selection.
  virtual std::string save_checkpoint();
  virtual void load_checkpoint(const std::string& id);

  // Every output token the backend can score, for unrestricted argmax.
  virtual std::vector<std::string> output_vocabulary() const;

 protected:
  // Shared precondition checks for in-process scorers.
  void check_request(const RenderedPrompt& prompt,
                     std::span<const std::string> candidates) const;
};

}  // namespace pcp

#endif  // PCP_SCORER_H_
