#include "pcp/scorer.h"

#include "pcp/error.h"

namespace pcp {

std::size_t ScoreVector::index_of(std::string_view token) const {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == token) return i;
  }
  throw ContractError("'" + std::string(token) + "' is not a scored candidate");
}

double ScoreVector::at(std::string_view token) const {
  return scores[index_of(token)];
}

std::size_t ScoreVector::argmax() const {
  if (scores.empty()) throw ContractError("argmax of an empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

std::vector<bool> Scorer::single_token(
    std::span<const std::string> words) const {
  std::vector<bool> out;
  out.reserve(words.size());
  const Placeholders ph = placeholders();
  for (const auto& w : words) {
    auto toks = tokenize(" " + w);
    out.push_back(toks.size() == 1 && toks[0] != ph.mask);
  }
  return out;
}

std::vector<ScoreVector> Scorer::score_batch(
    std::span<const RenderedPrompt> prompts,
    std::span<const std::string> candidates) const {
  std::vector<ScoreVector> out;
  out.reserve(prompts.size());
  for (const auto& p : prompts) out.push_back(score_mask(p, candidates));
  return out;
}

double Scorer::train_step(std::span<const TrainingExample>,
                          std::span<const std::string>, const StepOptions&) {
  throw CapabilityError("scorer '" + capabilities().tokenizer_kind +
                        "' is not trainable");
}

std::string Scorer::save_checkpoint() {
  throw CapabilityError("scorer does not support checkpoints");
}

void Scorer::load_checkpoint(const std::string&) {
  throw CapabilityError("scorer does not support checkpoints");
}

std::vector<std::string> Scorer::output_vocabulary() const {
  throw CapabilityError("scorer does not expose its output vocabulary");
}

void Scorer::check_request(const RenderedPrompt& prompt,
                           std::span<const std::string> candidates) const {
  if (candidates.empty()) throw ContractError("no candidates to score");
  auto toks = tokenize(prompt.text);
  mask_position(prompt, toks);
  auto single = single_token(candidates);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!single[i]) {
      throw ContractError("candidate '" + candidates[i] +
                          "' is not a single token");
    }
  }
}

}  // namespace pcp
