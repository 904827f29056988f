#include "pcp/reference_scorer.h"

#include <cmath>
#include <optional>
#include <random>
#include <set>

#include "json.hpp"
#include "pcp/error.h"
#include "pcp/loss.h"
#include "pcp/text.h"

namespace pcp {
namespace {

constexpr const char* kFormat = "pcp-reference-scorer";
constexpr int kFormatVersion = 1;
constexpr const char* kSegmentToken = "</s>";

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool has_word_byte(std::string_view tok) {
  for (unsigned char c : tok) {
    if (is_word_byte(c)) return true;
  }
  return false;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

ReferenceScorer::ReferenceScorer(ReferenceScorerConfig config,
                                 std::span<const std::string> corpus)
    : config_(config) {
  std::map<std::string, std::size_t> df;
  for (const auto& text : corpus) {
    for (const auto& [name, count] :
         extract_features(text, config_.window_features)) {
      ++df[name];
    }
  }
  const double n = static_cast<double>(corpus.size());
  for (const auto& [name, count] : df) {
    if (count < config_.min_df) continue;
    double idf = 1.0;
    if (config_.idf_weighting) {
      idf = std::log(n / static_cast<double>(count));
      if (!(idf > 0.0)) continue;
    }
    feature_index_[name] = features_.size();
    features_.push_back(name);
    idf_.push_back(idf);
  }
}

std::vector<std::string> ReferenceScorer::tokenize_text(
    std::string_view text, const Placeholders& ph) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!ph.mask.empty() && text.compare(i, ph.mask.size(), ph.mask) == 0) {
      out.push_back(ph.mask);
      i += ph.mask.size();
      continue;
    }
    if (text.compare(i, 4, kSegmentToken) == 0) {
      out.emplace_back(kSegmentToken);
      i += 4;
      continue;
    }
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
      out.emplace_back(1, text[i]);
      ++i;
      continue;
    }
    std::string word;
    while (i < text.size()) {
      auto c = static_cast<unsigned char>(text[i]);
      bool joiner = (c == '\'' || c == '-') && !word.empty() &&
                    i + 1 < text.size() &&
                    is_word_byte(static_cast<unsigned char>(text[i + 1]));
      if (!is_word_byte(c) && !joiner) break;
      word.push_back(text[i]);
      ++i;
    }
    out.push_back(to_lower(word));
  }
  return out;
}

std::map<std::string, double> ReferenceScorer::extract_features(
    std::string_view text, bool window_features, const Placeholders& ph) {
  auto toks = tokenize_text(text, ph);
  std::map<std::string, double> feats;
  std::optional<std::size_t> mask;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const auto& t = toks[i];
    if (t == ph.mask) {
      mask = i;
      continue;
    }
    if (t == kSegmentToken || !has_word_byte(t)) continue;
    feats[t] += 1.0;
  }
  if (window_features && mask) {
    auto usable = [&](std::size_t j) {
      return toks[j] != kSegmentToken && toks[j] != ph.mask;
    };
    for (std::size_t j = *mask; j-- > 0;) {
      if (usable(j)) {
        feats["L:" + toks[j]] += 1.0;
        break;
      }
    }
    for (std::size_t j = *mask + 1; j < toks.size(); ++j) {
      if (usable(j)) {
        feats["R:" + toks[j]] += 1.0;
        break;
      }
    }
  }
  return feats;
}

ScorerCapabilities ReferenceScorer::capabilities() const {
  return {true, true, "reference-word"};
}

std::vector<std::string> ReferenceScorer::tokenize(
    std::string_view text) const {
  return tokenize_text(text, placeholders());
}

ReferenceScorer::SparseFeatures ReferenceScorer::featurize(
    std::string_view text) const {
  SparseFeatures out;
  for (const auto& [name, count] :
       extract_features(text, config_.window_features, placeholders())) {
    auto it = feature_index_.find(name);
    if (it == feature_index_.end()) continue;
    out.emplace_back(it->second, count * idf_[it->second]);
  }
  return out;
}

std::vector<double> ReferenceScorer::initial_row(
    const std::string& candidate) const {
  std::vector<double> v(features_.size(), 0.0);
  if (config_.init_scale <= 0.0) return v;
  std::mt19937_64 rng(config_.seed ^ fnv1a(candidate));
  for (double& w : v) {
    // 53 random bits -> [0, 1), portable across standard libraries.
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    w = config_.init_scale * (2.0 * u - 1.0);
  }
  return v;
}

ReferenceScorer::Row& ReferenceScorer::row(const std::string& candidate) {
  auto it = weights_.find(candidate);
  if (it == weights_.end()) {
    it = weights_.emplace(candidate, Row{1.0, initial_row(candidate)}).first;
  }
  return it->second;
}

double ReferenceScorer::weight(const std::string& candidate,
                               std::size_t feature) const {
  if (feature >= features_.size()) throw ArgumentError("feature out of range");
  auto it = weights_.find(candidate);
  if (it == weights_.end()) return initial_row(candidate)[feature];
  return it->second.scale * it->second.values[feature];
}

void ReferenceScorer::set_weight(const std::string& candidate,
                                 std::size_t feature, double value) {
  if (feature >= features_.size()) throw ArgumentError("feature out of range");
  Row& r = row(candidate);
  r.values[feature] = value / r.scale;
}

double ReferenceScorer::score(const SparseFeatures& x,
                              const std::string& candidate) const {
  auto it = weights_.find(candidate);
  if (it == weights_.end()) {
    if (config_.init_scale <= 0.0) return 0.0;
    auto init = initial_row(candidate);
    double s = 0.0;
    for (const auto& [f, v] : x) s += v * init[f];
    return s;
  }
  double s = 0.0;
  for (const auto& [f, v] : x) s += v * it->second.values[f];
  return it->second.scale * s;
}

std::vector<double> ReferenceScorer::logits(
    const SparseFeatures& x, std::span<const std::string> candidates) const {
  std::vector<double> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(score(x, c));
  return out;
}

ScoreVector ReferenceScorer::score_mask(
    const RenderedPrompt& prompt,
    std::span<const std::string> candidates) const {
  check_request(prompt, candidates);
  auto x = featurize(prompt.text);
  return {std::vector<std::string>(candidates.begin(), candidates.end()),
          logits(x, candidates)};
}

void ReferenceScorer::check_training_batch(
    std::span<const TrainingExample> batch,
    std::span<const std::string> candidates) const {
  if (batch.empty()) throw ArgumentError("empty training batch");
  std::set<std::string_view> cands(candidates.begin(), candidates.end());
  for (const auto& ex : batch) {
    check_request(ex.prompt, candidates);
    if (!cands.count(ex.gold)) {
      throw ContractError("gold answer '" + ex.gold +
                          "' is not among the candidates");
    }
  }
}

double ReferenceScorer::batch_loss(std::span<const TrainingExample> batch,
                                   std::span<const std::string> candidates,
                                   double epsilon) const {
  check_training_batch(batch, candidates);
  ScoreVector sv{std::vector<std::string>(candidates.begin(), candidates.end()),
                 {}};
  double total = 0.0;
  for (const auto& ex : batch) {
    sv.scores = logits(featurize(ex.prompt.text), candidates);
    total += smoothed_cross_entropy(sv, ex.gold, epsilon);
  }
  return total / static_cast<double>(batch.size());
}

ReferenceScorer::Gradient ReferenceScorer::gradient(
    std::span<const TrainingExample> batch,
    std::span<const std::string> candidates, double epsilon) const {
  check_training_batch(batch, candidates);
  Gradient grad;
  for (const auto& c : candidates) {
    grad[c].assign(features_.size(), 0.0);
  }
  ScoreVector sv{std::vector<std::string>(candidates.begin(), candidates.end()),
                 {}};
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    auto x = featurize(ex.prompt.text);
    sv.scores = logits(x, candidates);
    auto g = smoothed_cross_entropy_grad(sv.scores, sv.index_of(ex.gold),
                                         epsilon);
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      auto& gc = grad[candidates[k]];
      for (const auto& [f, v] : x) gc[f] += g[k] * v * inv_b;
    }
  }
  return grad;
}

double ReferenceScorer::train_step(std::span<const TrainingExample> batch,
                                   std::span<const std::string> candidates,
                                   const StepOptions& options) {
  check_training_batch(batch, candidates);
  std::set<std::string_view> seen;
  for (const auto& c : candidates) {
    if (!seen.insert(c).second) {
      throw ContractError("duplicate candidate '" + c + "'");
    }
  }
  ScoreVector sv{std::vector<std::string>(candidates.begin(), candidates.end()),
                 {}};
  struct Pending {
    SparseFeatures x;
    std::vector<double> g;
  };
  std::vector<Pending> pending;
  pending.reserve(batch.size());
  double total = 0.0;
  for (const auto& ex : batch) {
    auto x = featurize(ex.prompt.text);
    sv.scores = logits(x, candidates);
    std::size_t gold = sv.index_of(ex.gold);
    total += smoothed_cross_entropy(sv.scores, gold, options.label_smoothing);
    pending.push_back({std::move(x), smoothed_cross_entropy_grad(
                                         sv.scores, gold,
                                         options.label_smoothing)});
  }

  // w <- w * (1 - lr * wd) - lr * grad
  const double decay = 1.0 - options.learning_rate * options.weight_decay;
  const double step =
      options.learning_rate / static_cast<double>(batch.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    Row& r = row(candidates[k]);
    r.scale *= decay;
    if (std::abs(r.scale) < 1e-6) {
      for (double& v : r.values) v *= r.scale;
      r.scale = 1.0;
    }
    for (const auto& p : pending) {
      double coeff = step * p.g[k] / r.scale;
      for (const auto& [f, v] : p.x) r.values[f] -= coeff * v;
    }
  }
  return total / static_cast<double>(batch.size());
}

std::string ReferenceScorer::save_checkpoint() {
  std::string id = "ckpt-" + std::to_string(next_snapshot_++);
  snapshots_[id] = weights_;
  return id;
}

void ReferenceScorer::load_checkpoint(const std::string& id) {
  auto it = snapshots_.find(id);
  if (it == snapshots_.end()) {
    throw ArgumentError("unknown checkpoint '" + id + "'");
  }
  weights_ = it->second;
}

std::vector<std::string> ReferenceScorer::output_vocabulary() const {
  std::vector<std::string> out;
  for (const auto& [c, r] : weights_) out.push_back(c);
  return out;
}

std::string ReferenceScorer::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = kFormat;
  j["version"] = kFormatVersion;
  j["config"] = {{"seed", config_.seed},
                 {"init_scale", config_.init_scale},
                 {"window_features", config_.window_features},
                 {"idf_weighting", config_.idf_weighting},
                 {"min_df", config_.min_df}};
  j["features"] = features_;
  j["idf"] = idf_;
  nlohmann::ordered_json w = nlohmann::ordered_json::object();
  for (const auto& [c, r] : weights_) {
    std::vector<double> v(r.values.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = r.scale * r.values[i];
    w[c] = v;
  }
  j["weights"] = std::move(w);
  return j.dump();
}

ReferenceScorer ReferenceScorer::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("reference checkpoint: ") + e.what());
  }
  try {
    if (j.at("format") != kFormat) {
      throw SchemaError(0, "format", "not a reference scorer checkpoint");
    }
    if (j.at("version") != kFormatVersion) {
      throw SchemaError(0, "version", "unsupported checkpoint version");
    }
    ReferenceScorer s;
    const auto& c = j.at("config");
    s.config_.seed = c.at("seed").get<std::uint64_t>();
    s.config_.init_scale = c.at("init_scale").get<double>();
    s.config_.window_features = c.at("window_features").get<bool>();
    s.config_.idf_weighting = c.at("idf_weighting").get<bool>();
    s.config_.min_df = c.at("min_df").get<std::size_t>();
    s.features_ = j.at("features").get<std::vector<std::string>>();
    s.idf_ = j.at("idf").get<std::vector<double>>();
    if (s.idf_.size() != s.features_.size()) {
      throw SchemaError(0, "idf", "length differs from features");
    }
    for (std::size_t i = 0; i < s.features_.size(); ++i) {
      s.feature_index_[s.features_[i]] = i;
    }
    for (const auto& [cand, values] : j.at("weights").items()) {
      auto v = values.get<std::vector<double>>();
      if (v.size() != s.features_.size()) {
        throw SchemaError(0, "weights." + cand, "length differs from features");
      }
      s.weights_[cand] = Row{1.0, std::move(v)};
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(0, "checkpoint", e.what());
  }
}

void ReferenceScorer::save(const std::string& path) const {
  write_file(path, to_json() + "\n");
}

ReferenceScorer ReferenceScorer::load(const std::string& path) {
  return from_json(read_file(path));
}

}  // namespace pcp
