#ifndef PCP_MOCK_SCORER_H_
#define PCP_MOCK_SCORER_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pcp/scorer.h"

namespace pcp {

// Scripted, deterministic, non-trainable scorer for tests and dry runs.
// Candidates get the score of the first rule whose substring occurs in the
// prompt text, else the default script, else `default_score`.
class MockScorer : public Scorer {
 public:
  using Script = std::map<std::string, double>;

  explicit MockScorer(Script script = {}, double default_score = 0.0);

  void add_rule(std::string substring, Script scores);

  ScorerCapabilities capabilities() const override;
  std::vector<std::string> tokenize(std::string_view text) const override;
  ScoreVector score_mask(
      const RenderedPrompt& prompt,
      std::span<const std::string> candidates) const override;
  std::vector<std::string> output_vocabulary() const override;

 private:
  Script script_;
  double default_score_;
  std::vector<std::pair<std::string, Script>> rules_;
};

}  // namespace pcp

#endif  // PCP_MOCK_SCORER_H_
