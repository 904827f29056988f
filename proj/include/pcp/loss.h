#ifndef PCP_LOSS_H_
#define PCP_LOSS_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "pcp/scorer.h"

namespace pcp {

// Cross-entropy of softmax(scores) against the smoothed target
// q = (1 - epsilon) * onehot(gold) + epsilon / K over the K candidates.
// Requires K >= 2 and epsilon in [0, 1); throws ContractError otherwise or
// when `gold` is not among the candidates.
double smoothed_cross_entropy(const ScoreVector& scores, std::string_view gold,
                              double epsilon);
double smoothed_cross_entropy(std::span<const double> logits, std::size_t gold,
                              double epsilon);

// d loss / d logits = softmax(logits) - q.
std::vector<double> smoothed_cross_entropy_grad(std::span<const double> logits,
                                                std::size_t gold,
                                                double epsilon);

std::vector<double> softmax(std::span<const double> logits);

}  // namespace pcp

#endif  // PCP_LOSS_H_
