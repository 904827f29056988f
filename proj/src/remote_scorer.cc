#include "pcp/remote_scorer.h"

#include <chrono>
#include <cmath>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "pcp/error.h"
#include "pcp/text.h"

namespace pcp {
namespace {

using nlohmann::json;

json parse_body(const std::string& body, const std::string& path) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw BackendUnavailable(1, path + ": malformed response: " + e.what());
  }
}

template <typename T>
T field(const json& j, const char* name, const std::string& path) {
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw HandshakeError(path + ": response lacks a valid '" +
                         std::string(name) + "' field");
  }
}

}  // namespace

RemoteScorer::RemoteScorer(RemoteEndpoint endpoint)
    : endpoint_(std::move(endpoint)) {
  json health = parse_body(get("/health"), "/health");
  info_.version = field<std::string>(health, "version", "/health");
  if (info_.version != kSidecarProtocolVersion) {
    throw HandshakeError("sidecar speaks protocol '" + info_.version +
                         "', client expects '" + kSidecarProtocolVersion +
                         "'");
  }
  info_.model_name = health.value("model_name", std::string());
  info_.mask_token = field<std::string>(health, "mask_token", "/health");
  info_.sep_token = field<std::string>(health, "sep_token", "/health");
  info_.trainable = health.value("trainable", false);
  if (info_.mask_token.empty()) {
    throw HandshakeError("/health advertises an empty mask token");
  }
}

std::string RemoteScorer::get(const std::string& path) const {
  return post(path, std::string());
}

// Empty body means GET. Transport failures and 5xx are retried; 4xx map to
// ContractError since they reject the request itself.
std::string RemoteScorer::post(const std::string& path,
                               const std::string& body) const {
  const int attempts = 1 + std::max(0, endpoint_.retries);
  std::string last_error;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    httplib::Client cli(endpoint_.url);
    auto timeout = std::chrono::milliseconds(endpoint_.timeout_ms);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    auto res = body.empty() ? cli.Get(path)
                            : cli.Post(path, body, "application/json");
    if (!res) {
      last_error = path + ": " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      return res->body;
    } else if (res->status >= 400 && res->status < 500) {
      throw ContractError("sidecar rejected " + path + " (" +
                          std::to_string(res->status) + "): " + res->body);
    } else {
      last_error = path + ": HTTP " + std::to_string(res->status) + " " +
                   res->body;
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
    }
  }
  throw BackendUnavailable(attempts, endpoint_.url + last_error);
}

ScorerCapabilities RemoteScorer::capabilities() const {
  return {info_.trainable, true, "remote:" + info_.model_name};
}

Placeholders RemoteScorer::placeholders() const {
  return {info_.mask_token, info_.sep_token + info_.sep_token};
}

std::vector<std::string> RemoteScorer::tokenize(std::string_view text) const {
  std::vector<std::string> out;
  for (const auto& piece : split(normalize_whitespace(text), ' ')) {
    std::string_view rest = piece;
    while (!rest.empty()) {
      auto pos = rest.find(info_.mask_token);
      if (pos == std::string_view::npos) {
        out.emplace_back(rest);
        break;
      }
      if (pos > 0) out.emplace_back(rest.substr(0, pos));
      out.push_back(info_.mask_token);
      rest = rest.substr(pos + info_.mask_token.size());
    }
  }
  return out;
}

std::vector<bool> RemoteScorer::single_token(
    std::span<const std::string> words) const {
  json req = {{"words", std::vector<std::string>(words.begin(), words.end())}};
  json res = parse_body(post("/tokenize_check", req.dump()), "/tokenize_check");
  auto flags = field<std::vector<bool>>(res, "single_token", "/tokenize_check");
  if (flags.size() != words.size()) {
    throw ContractError("/tokenize_check returned " +
                        std::to_string(flags.size()) + " flags for " +
                        std::to_string(words.size()) + " words");
  }
  return flags;
}

ScoreVector RemoteScorer::score_mask(
    const RenderedPrompt& prompt,
    std::span<const std::string> candidates) const {
  return score_batch(std::span<const RenderedPrompt>(&prompt, 1), candidates)
      .front();
}

std::vector<ScoreVector> RemoteScorer::score_batch(
    std::span<const RenderedPrompt> prompts,
    std::span<const std::string> candidates) const {
  if (candidates.empty()) throw ContractError("no candidates to score");
  std::vector<std::string> texts;
  for (const auto& p : prompts) {
    auto toks = tokenize(p.text);
    mask_position(p, toks);
    texts.push_back(p.text);
  }
  std::vector<std::string> cands(candidates.begin(), candidates.end());
  json req = {{"texts", texts}, {"candidates", cands}};
  json res = parse_body(post("/score", req.dump()), "/score");
  auto rows = field<std::vector<std::vector<double>>>(res, "scores", "/score");
  if (rows.size() != prompts.size()) {
    throw ContractError("/score returned " + std::to_string(rows.size()) +
                        " rows for " + std::to_string(prompts.size()) +
                        " texts");
  }
  std::vector<ScoreVector> out;
  for (auto& row : rows) {
    if (row.size() != cands.size()) {
      throw ContractError("/score row does not align with the candidates");
    }
    for (double s : row) {
      if (!std::isfinite(s)) throw ContractError("/score returned a non-finite score");
    }
    out.push_back({cands, std::move(row)});
  }
  return out;
}

double RemoteScorer::train_step(std::span<const TrainingExample> batch,
                                std::span<const std::string> candidates,
                                const StepOptions& options) {
  if (!info_.trainable) {
    throw CapabilityError("sidecar model '" + info_.model_name +
                          "' is not trainable");
  }
  if (batch.empty()) throw ArgumentError("empty training batch");
  std::vector<std::string> texts, gold;
  for (const auto& ex : batch) {
    texts.push_back(ex.prompt.text);
    gold.push_back(ex.gold);
  }
  json req = {{"texts", texts},
              {"gold", gold},
              {"candidates",
               std::vector<std::string>(candidates.begin(), candidates.end())},
              {"lr", options.learning_rate},
              {"weight_decay", options.weight_decay},
              {"label_smoothing", options.label_smoothing}};
  std::lock_guard<std::mutex> lock(train_mu_);
  json res = parse_body(post("/train_batch", req.dump()), "/train_batch");
  return field<double>(res, "loss", "/train_batch");
}

std::string RemoteScorer::save_checkpoint() {
  std::lock_guard<std::mutex> lock(train_mu_);
  json res = parse_body(post("/save", "{}"), "/save");
  return field<std::string>(res, "checkpoint_id", "/save");
}

void RemoteScorer::load_checkpoint(const std::string& id) {
  std::lock_guard<std::mutex> lock(train_mu_);
  json req = {{"checkpoint_id", id}};
  parse_body(post("/load", req.dump()), "/load");
}

}  // namespace pcp
