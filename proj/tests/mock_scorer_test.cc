#include "pcp/mock_scorer.h"

#include <gtest/gtest.h>

#include "pcp/error.h"
#include "pcp/prompt.h"

namespace pcp {
namespace {

RenderedPrompt t6(const std::string& a1 = "A", const std::string& a2 = "B") {
  return render(builtin_template("T6"), a1, a2);
}

TEST(MockScorer, ReturnsScriptedScores) {
  MockScorer mock({{"because", 2.0}, {"and", 1.5}});
  std::vector<std::string> cands = {"because", "and", "but"};
  ScoreVector sv = mock.score_mask(t6(), cands);
  EXPECT_EQ(sv.tokens, cands);
  EXPECT_EQ(sv.scores, (std::vector<double>{2.0, 1.5, 0.0}));
  EXPECT_EQ(sv.argmax(), 0u);
  EXPECT_DOUBLE_EQ(sv.at("and"), 1.5);
  EXPECT_THROW(sv.at("zebra"), ContractError);
}

TEST(MockScorer, FirstMatchingRuleWins) {
  MockScorer mock({{"and", 1.0}});
  mock.add_rule("rained", {{"because", 3.0}});
  mock.add_rule("rain", {{"but", 3.0}});
  std::vector<std::string> cands = {"because", "and", "but"};
  EXPECT_EQ(mock.score_mask(t6("It rained", "x"), cands).argmax(), 0u);
  EXPECT_EQ(mock.score_mask(t6("Heavy rain", "x"), cands).argmax(), 2u);
  EXPECT_EQ(mock.score_mask(t6("Sunny", "x"), cands).argmax(), 1u);
}

TEST(MockScorer, IsNotTrainable) {
  MockScorer mock;
  EXPECT_FALSE(mock.capabilities().trainable);
  EXPECT_TRUE(mock.capabilities().deterministic);
  std::vector<std::string> cands = {"a", "b"};
  std::vector<TrainingExample> batch = {{t6(), "a"}};
  EXPECT_THROW(mock.train_step(batch, cands, {}), CapabilityError);
  EXPECT_THROW(mock.save_checkpoint(), CapabilityError);
}

TEST(MockScorer, RejectsBadRequests) {
  MockScorer mock;
  std::vector<std::string> multi = {"for example"};
  EXPECT_THROW(mock.score_mask(t6(), multi), ContractError);
  std::vector<std::string> none;
  EXPECT_THROW(mock.score_mask(t6(), none), ContractError);
  RenderedPrompt no_mask{"A B.", "x", "<mask>", ""};
  std::vector<std::string> ok = {"and"};
  EXPECT_THROW(mock.score_mask(no_mask, ok), ContractError);
}

TEST(MockScorer, ArgmaxInvariantUnderPositiveAffineMaps) {
  std::vector<std::string> cands = {"but", "because", "and", "so"};
  MockScorer::Script base = {{"but", 0.7}, {"because", 1.9}, {"and", -0.4},
                             {"so", 1.2}};
  std::size_t want = MockScorer(base).score_mask(t6(), cands).argmax();
  for (double scale : {0.001, 0.5, 1.0, 7.0, 1e6}) {
    for (double shift : {-100.0, 0.0, 3.5}) {
      MockScorer::Script moved;
      for (const auto& [k, v] : base) moved[k] = scale * v + shift;
      EXPECT_EQ(MockScorer(moved).score_mask(t6(), cands).argmax(), want);
    }
  }
}

}  // namespace
}  // namespace pcp
