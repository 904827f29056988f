#include "pcp/metrics.h"

#include <gtest/gtest.h>

#include <random>

#include "json.hpp"
#include "support/oracles.h"

namespace pcp {
namespace {

std::vector<std::string> labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("L" + std::to_string(i));
  return out;
}

TEST(ComputeMetrics, AllCorrect) {
  std::vector<std::size_t> gold = {0, 1, 2, 2};
  auto m = compute_metrics(gold, std::span<const std::size_t>(gold), labels(3));
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(m.macro_f1, 1.0);
}

TEST(ComputeMetrics, WorkedExample) {
  std::vector<std::size_t> gold = {0, 0, 1, 1};
  std::vector<std::size_t> pred = {0, 1, 1, 1};
  auto m = compute_metrics(gold, pred, {"A", "B"});
  EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
  EXPECT_NEAR(m.f1[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(m.f1[1], 0.8, 1e-12);
  EXPECT_NEAR(m.macro_f1, (2.0 / 3.0 + 0.8) / 2.0, 1e-12);
  EXPECT_NEAR(m.macro_f1, 0.7333, 1e-4);
}

TEST(ComputeMetrics, AbsentClassCountsAsZero) {
  std::vector<std::size_t> gold = {0, 1};
  auto m = compute_metrics(gold, std::span<const std::size_t>(gold),
                           {"A", "B", "C"});
  EXPECT_DOUBLE_EQ(m.f1[2], 0.0);
  EXPECT_NEAR(m.macro_f1, 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
}

TEST(ComputeMetrics, UnmappedPredictionsAreWrong) {
  std::vector<std::size_t> gold = {0, 1, 1};
  std::vector<std::optional<std::size_t>> pred = {0, std::nullopt, 1};
  auto m = compute_metrics(gold, pred, {"A", "B"});
  EXPECT_NEAR(m.accuracy, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(m.unmapped[1], 1u);
  EXPECT_EQ(m.confusion[1][1], 1u);
  EXPECT_EQ(m.confusion[1][0], 0u);
  EXPECT_NEAR(m.recall[1], 0.5, 1e-12);
  EXPECT_NEAR(m.precision[1], 1.0, 1e-12);
}

TEST(ComputeMetrics, MatchesBruteForceOracle) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t k = 1 + rng() % 15;
    std::size_t n = 1 + rng() % 500;
    std::vector<std::size_t> gold(n);
    std::vector<std::optional<std::size_t>> pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = rng() % k;
      if (rng() % 20 == 0) continue;  // unmapped
      pred[i] = rng() % 3 == 0 ? gold[i] : rng() % k;
    }
    auto m = compute_metrics(gold, pred, labels(k));
    auto o = testing::metrics_oracle(gold, pred, k);
    ASSERT_NEAR(m.accuracy, o.accuracy, 1e-9);
    ASSERT_NEAR(m.macro_f1, o.macro_f1, 1e-9);
    for (std::size_t c = 0; c < k; ++c) ASSERT_NEAR(m.f1[c], o.f1[c], 1e-9);
  }
}

TEST(ComputeMetrics, ConfusionMarginals) {
  std::mt19937_64 rng(4);
  std::size_t k = 6, n = 300;
  std::vector<std::size_t> gold(n), pred(n);
  for (std::size_t i = 0; i < n; ++i) {
    gold[i] = rng() % k;
    pred[i] = rng() % k;
  }
  auto m = compute_metrics(gold, pred, labels(k));
  std::size_t trace = 0, total = 0;
  for (std::size_t g = 0; g < k; ++g) {
    std::size_t row = 0;
    for (std::size_t p = 0; p < k; ++p) row += m.confusion[g][p];
    EXPECT_EQ(row, m.support[g]);
    std::size_t col = 0;
    for (std::size_t r = 0; r < k; ++r) col += m.confusion[r][g];
    EXPECT_EQ(col, m.predicted[g]);
    trace += m.confusion[g][g];
    total += row;
  }
  EXPECT_DOUBLE_EQ(m.accuracy, double(trace) / double(total));
}

TEST(MetricsReport, JsonHasOneRowPerLabel) {
  std::vector<std::size_t> gold = {0, 1, 2};
  auto m = compute_metrics(gold, std::span<const std::size_t>(gold), labels(11));
  auto j = nlohmann::json::parse(m.to_json());
  ASSERT_TRUE(j.contains("per_class"));
  EXPECT_EQ(j["per_class"].size(), 11u);
  EXPECT_NE(m.to_table().find("L10"), std::string::npos);
  // Header plus one row per label.
  std::string tsv = m.confusion_tsv();
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 12);
}

}  // namespace
}  // namespace pcp
