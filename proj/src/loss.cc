#include "pcp/loss.h"

#include <algorithm>
#include <cmath>

#include "pcp/error.h"

namespace pcp {
namespace {

void check_args(std::span<const double> logits, std::size_t gold,
                double epsilon) {
  if (logits.size() < 2) {
    throw ContractError("smoothed cross-entropy needs at least 2 candidates");
  }
  if (gold >= logits.size()) throw ContractError("gold index out of range");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw ContractError("label smoothing must lie in [0, 1)");
  }
}

double log_sum_exp(std::span<const double> logits) {
  double hi = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double s : logits) sum += std::exp(s - hi);
  return hi + std::log(sum);
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  double lse = log_sum_exp(logits);
  for (double& v : p) v = std::exp(v - lse);
  return p;
}

double smoothed_cross_entropy(std::span<const double> logits, std::size_t gold,
                              double epsilon) {
  check_args(logits, gold, epsilon);
  // With z = s - max(s) and sum(q) = 1:
  //   -sum q_i ln p_i = ln sum e^z - sum q_i z_i.
  // Equal logits give z = 0 and hence exactly ln K.
  const double k = static_cast<double>(logits.size());
  const double hi = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  double expected = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i] - hi;
    sum += std::exp(z);
    expected += (epsilon / k + (i == gold ? 1.0 - epsilon : 0.0)) * z;
  }
  return std::log(sum) - expected;
}

double smoothed_cross_entropy(const ScoreVector& scores, std::string_view gold,
                              double epsilon) {
  return smoothed_cross_entropy(scores.scores, scores.index_of(gold), epsilon);
}

std::vector<double> smoothed_cross_entropy_grad(std::span<const double> logits,
                                                std::size_t gold,
                                                double epsilon) {
  check_args(logits, gold, epsilon);
  std::vector<double> g = softmax(logits);
  const double k = static_cast<double>(logits.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] -= epsilon / k + (i == gold ? 1.0 - epsilon : 0.0);
  }
  return g;
}

}  // namespace pcp
