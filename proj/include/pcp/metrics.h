#ifndef PCP_METRICS_H_
#define PCP_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pcp {

// Classification metrics over a fixed label axis. A prediction of nullopt
// (an answer outside every answer set) counts as wrong and is tallied in
// `unmapped` instead of the confusion matrix.
struct MetricsReport {
  std::vector<std::string> labels;
  std::size_t total = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<std::size_t> support;    // gold count per label
  std::vector<std::size_t> predicted;  // prediction count per label
  std::vector<std::size_t> unmapped;   // per gold label
  std::vector<std::vector<std::size_t>> confusion;  // [gold][predicted]

  std::string to_json() const;
  // Aligned plain-text table: per-class P/R/F1/support plus the averages.
  std::string to_table() const;
  std::string confusion_tsv() const;
};

// Precision, recall and F1 use the zero convention (0/0 -> 0), so a label
// that is never gold nor predicted has F1 = 0 and still enters the macro
// average.
MetricsReport compute_metrics(std::span<const std::size_t> gold,
                              std::span<const std::optional<std::size_t>> pred,
                              std::vector<std::string> labels);
MetricsReport compute_metrics(std::span<const std::size_t> gold,
                              std::span<const std::size_t> pred,
                              std::vector<std::string> labels);

}  // namespace pcp

#endif  // PCP_METRICS_H_
