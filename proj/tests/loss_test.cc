#include "pcp/loss.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pcp/error.h"
#include "support/oracles.h"

namespace pcp {
namespace {

TEST(SmoothedCrossEntropy, UniformScoresGiveLogK) {
  ScoreVector sv{{"a", "b", "c", "d"}, {0.3, 0.3, 0.3, 0.3}};
  EXPECT_EQ(smoothed_cross_entropy(sv, "c", 0.0), std::log(4.0));
  EXPECT_NEAR(smoothed_cross_entropy(sv, "c", 0.0), 1.386294, 1e-6);
  // Smoothing does not change the loss of a uniform prediction.
  EXPECT_EQ(smoothed_cross_entropy(sv, "a", 0.3), std::log(4.0));
}

TEST(SmoothedCrossEntropy, SaturatedGoldGivesZero) {
  ScoreVector sv{{"a", "b", "c"}, {1000.0, 0.0, 0.0}};
  EXPECT_NEAR(smoothed_cross_entropy(sv, "a", 0.0), 0.0, 1e-6);
}

TEST(SmoothedCrossEntropy, TwoCandidateExample) {
  ScoreVector sv{{"a", "b"}, {1.0, 0.0}};
  double p_a = 0.731059, p_b = 0.268941;
  double want = -(0.975 * std::log(p_a) + 0.025 * std::log(p_b));
  EXPECT_NEAR(smoothed_cross_entropy(sv, "a", 0.05), want, 1e-6);
  EXPECT_NEAR(smoothed_cross_entropy(sv, "a", 0.05),
              testing::smoothed_ce_oracle({1.0, 0.0}, 0, 0.05), 1e-12);
}

TEST(SmoothedCrossEntropy, MatchesOracleOnRandomCases) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> k_dist(2, 30);
  std::uniform_real_distribution<double> score(-20.0, 20.0);
  std::uniform_real_distribution<double> eps_dist(0.0, 0.99);
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t k = static_cast<std::size_t>(k_dist(rng));
    std::vector<double> s(k);
    for (auto& v : s) v = score(rng);
    std::size_t gold = rng() % k;
    double eps = trial % 10 == 0 ? 0.0 : eps_dist(rng);
    double got = smoothed_cross_entropy(s, gold, eps);
    EXPECT_NEAR(got, testing::smoothed_ce_oracle(s, gold, eps), 1e-9);
    EXPECT_GE(got, 0.0);
  }
}

TEST(SmoothedCrossEntropy, Errors) {
  ScoreVector sv{{"a", "b"}, {1.0, 0.0}};
  EXPECT_THROW(smoothed_cross_entropy(sv, "zebra", 0.05), ContractError);
  EXPECT_THROW(smoothed_cross_entropy(sv, "a", 1.0), ContractError);
  EXPECT_THROW(smoothed_cross_entropy(sv, "a", -0.1), ContractError);
  ScoreVector one{{"a"}, {1.0}};
  EXPECT_THROW(smoothed_cross_entropy(one, "a", 0.0), ContractError);
}

TEST(SmoothedCrossEntropyGrad, MatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> score(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t k = 2 + rng() % 8;
    std::vector<double> s(k);
    for (auto& v : s) v = score(rng);
    std::size_t gold = rng() % k;
    auto g = smoothed_cross_entropy_grad(s, gold, 0.05);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double h = 1e-5;
      auto up = s, down = s;
      up[i] += h;
      down[i] -= h;
      double fd = (testing::smoothed_ce_oracle(up, gold, 0.05) -
                   testing::smoothed_ce_oracle(down, gold, 0.05)) /
                  (2 * h);
      EXPECT_NEAR(g[i], fd, 1e-7);
      sum += g[i];
    }
    EXPECT_NEAR(sum, 0.0, 1e-12);
  }
}

TEST(Softmax, SumsToOneAndIsShiftInvariant) {
  std::vector<double> s = {1.0, 2.0, 3.0};
  std::vector<double> shifted = {1001.0, 1002.0, 1003.0};
  auto p = softmax(s);
  auto q = softmax(shifted);
  double total = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    total += p[i];
    EXPECT_NEAR(p[i], q[i], 1e-12);
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

}  // namespace
}  // namespace pcp
