#include "pcp/mock_scorer.h"

#include <set>

#include "pcp/text.h"

namespace pcp {

MockScorer::MockScorer(Script script, double default_score)
    : script_(std::move(script)), default_score_(default_score) {}

void MockScorer::add_rule(std::string substring, Script scores) {
  rules_.emplace_back(std::move(substring), std::move(scores));
}

ScorerCapabilities MockScorer::capabilities() const {
  return {false, true, "mock-whitespace"};
}

// Whitespace split that also detaches the mask marker from glued
// punctuation ("<mask>." -> "<mask>", ".").
std::vector<std::string> MockScorer::tokenize(std::string_view text) const {
  const std::string mask = placeholders().mask;
  std::vector<std::string> out;
  for (const auto& piece : split(normalize_whitespace(text), ' ')) {
    if (piece.empty()) continue;
    std::string_view rest = piece;
    while (!rest.empty()) {
      std::size_t pos = rest.find(mask);
      if (pos == std::string_view::npos) {
        out.emplace_back(rest);
        break;
      }
      if (pos > 0) out.emplace_back(rest.substr(0, pos));
      out.push_back(mask);
      rest = rest.substr(pos + mask.size());
    }
  }
  return out;
}

ScoreVector MockScorer::score_mask(
    const RenderedPrompt& prompt,
    std::span<const std::string> candidates) const {
  check_request(prompt, candidates);
  const Script* script = &script_;
  for (const auto& [substring, scores] : rules_) {
    if (prompt.text.find(substring) != std::string::npos) {
      script = &scores;
      break;
    }
  }
  ScoreVector out;
  for (const auto& c : candidates) {
    auto it = script->find(c);
    out.tokens.push_back(c);
    out.scores.push_back(it != script->end() ? it->second : default_score_);
  }
  return out;
}

std::vector<std::string> MockScorer::output_vocabulary() const {
  std::set<std::string> vocab;
  for (const auto& [tok, s] : script_) vocab.insert(tok);
  for (const auto& [sub, scores] : rules_) {
    for (const auto& [tok, s] : scores) vocab.insert(tok);
  }
  return {vocab.begin(), vocab.end()};
}

}  // namespace pcp
