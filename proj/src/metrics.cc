#include "pcp/metrics.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "pcp/error.h"

namespace pcp {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

MetricsReport compute_metrics(std::span<const std::size_t> gold,
                              std::span<const std::optional<std::size_t>> pred,
                              std::vector<std::string> labels) {
  if (gold.size() != pred.size()) {
    throw ArgumentError("gold and predicted sequences differ in length");
  }
  const std::size_t k = labels.size();
  MetricsReport m;
  m.labels = std::move(labels);
  m.total = gold.size();
  m.support.assign(k, 0);
  m.predicted.assign(k, 0);
  m.unmapped.assign(k, 0);
  m.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] >= k || (pred[i] && *pred[i] >= k)) {
      throw ArgumentError("label index out of range");
    }
    ++m.support[gold[i]];
    if (!pred[i]) {
      ++m.unmapped[gold[i]];
      continue;
    }
    ++m.predicted[*pred[i]];
    ++m.confusion[gold[i]][*pred[i]];
    if (*pred[i] == gold[i]) ++correct;
  }
  m.accuracy = ratio(correct, m.total);
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = m.confusion[c][c];
    double p = ratio(tp, m.predicted[c]);
    double r = ratio(tp, m.support[c]);
    double f = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    m.precision.push_back(p);
    m.recall.push_back(r);
    m.f1.push_back(f);
    f1_sum += f;
  }
  m.macro_f1 = k == 0 ? 0.0 : f1_sum / static_cast<double>(k);
  return m;
}

MetricsReport compute_metrics(std::span<const std::size_t> gold,
                              std::span<const std::size_t> pred,
                              std::vector<std::string> labels) {
  std::vector<std::optional<std::size_t>> p(pred.begin(), pred.end());
  return compute_metrics(gold, p, std::move(labels));
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["total"] = total;
  j["accuracy"] = accuracy;
  j["macro_f1"] = macro_f1;
  nlohmann::ordered_json per_class = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < labels.size(); ++c) {
    per_class.push_back({{"label", labels[c]},
                         {"precision", precision[c]},
                         {"recall", recall[c]},
                         {"f1", f1[c]},
                         {"support", support[c]},
                         {"predicted", predicted[c]}});
  }
  j["per_class"] = std::move(per_class);
  j["labels"] = labels;
  j["confusion"] = confusion;
  j["unmapped"] = unmapped;
  return j.dump(2);
}

std::string MetricsReport::to_table() const {
  std::size_t width = 9;
  for (const auto& l : labels) width = std::max(width, l.size());
  auto pad = [&](const std::string& s) {
    return s + std::string(width + 2 - s.size(), ' ');
  };
  std::ostringstream out;
  out << pad("label") << "precision  recall     f1         support\n";
  for (std::size_t c = 0; c < labels.size(); ++c) {
    out << pad(labels[c]) << fixed(100 * precision[c], 2) << std::string(5, ' ')
        << fixed(100 * recall[c], 2) << std::string(5, ' ')
        << fixed(100 * f1[c], 2) << std::string(5, ' ') << support[c] << "\n";
  }
  out << pad("Macro-F1") << fixed(100 * macro_f1, 2) << "\n";
  out << pad("Accuracy") << fixed(100 * accuracy, 2) << "\n";
  out << pad("Total") << total << "\n";
  return out.str();
}

std::string MetricsReport::confusion_tsv() const {
  std::ostringstream out;
  out << "gold\\predicted";
  for (const auto& l : labels) out << "\t" << l;
  out << "\tunmapped\n";
  for (std::size_t g = 0; g < labels.size(); ++g) {
    out << labels[g];
    for (std::size_t p = 0; p < labels.size(); ++p) out << "\t" << confusion[g][p];
    out << "\t" << unmapped[g] << "\n";
  }
  return out.str();
}

}  // namespace pcp
