#include "support/fake_sidecar.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>

#include "httplib.h"
#include "json.hpp"

namespace pcp::testing {
namespace {

using nlohmann::json;

std::size_t occurrences(const std::string& text, const std::string& word) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(word); pos != std::string::npos;
       pos = text.find(word, pos + word.size())) {
    ++n;
  }
  return n;
}

std::size_t count_masks(const std::string& text, const std::string& mask) {
  return occurrences(text, mask);
}

}  // namespace

FakeSidecar::FakeSidecar(FakeSidecarOptions options)
    : options_(std::move(options)),
      server_(std::make_unique<httplib::Server>()),
      failures_left_(options_.fail_first) {
  auto& srv = *server_;
  // Records the request and answers 503 while failures are pending.
  auto gate = [this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard<std::mutex> lock(mu_);
    requests_.push_back(req.path);
    bodies_[req.path] = req.body;
    if (failures_left_ > 0) {
      --failures_left_;
      res.status = 503;
      res.set_content("warming up", "text/plain");
      return false;
    }
    return true;
  };
  auto reply = [](httplib::Response& res, const json& body) {
    res.set_content(body.dump(), "application/json");
  };
  auto reject = [](httplib::Response& res, const std::string& why) {
    res.status = 400;
    res.set_content(json{{"error", why}}.dump(), "application/json");
  };

  srv.Get("/health", [=, this](const httplib::Request& req,
                               httplib::Response& res) {
    if (!gate(req, res)) return;
    reply(res, {{"version", options_.version},
                {"model_name", options_.model_name},
                {"mask_token", options_.mask_token},
                {"sep_token", options_.sep_token},
                {"trainable", options_.trainable}});
  });
  srv.Post("/tokenize_check", [=, this](const httplib::Request& req,
                                        httplib::Response& res) {
    if (!gate(req, res)) return;
    std::vector<bool> flags;
    json body = json::parse(req.body);
    for (const auto& w : body.at("words")) {
      flags.push_back(w.get<std::string>().find(' ') == std::string::npos);
    }
    reply(res, {{"single_token", flags}});
  });
  srv.Post("/score", [=, this](const httplib::Request& req,
                               httplib::Response& res) {
    if (!gate(req, res)) return;
    json body = json::parse(req.body);
    json rows = json::array();
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& t : body.at("texts")) {
      std::string text = t.get<std::string>();
      if (count_masks(text, options_.mask_token) != 1) {
        return reject(res, "text must contain exactly one mask");
      }
      json row = json::array();
      for (const auto& c : body.at("candidates")) {
        std::string word = c.get<std::string>();
        if (word.find(' ') != std::string::npos) {
          return reject(res, "multi-token candidate: " + word);
        }
        double b = bias_.count(word) ? bias_.at(word) : 0.0;
        row.push_back(b + static_cast<double>(occurrences(text, word)));
      }
      rows.push_back(row);
    }
    reply(res, {{"scores", rows}});
  });
  srv.Post("/train_batch", [=, this](const httplib::Request& req,
                                     httplib::Response& res) {
    if (!gate(req, res)) return;
    json body = json::parse(req.body);
    auto texts = body.at("texts").get<std::vector<std::string>>();
    auto gold = body.at("gold").get<std::vector<std::string>>();
    auto cands = body.at("candidates").get<std::vector<std::string>>();
    double lr = body.at("lr").get<double>();
    double eps = body.at("label_smoothing").get<double>();
    std::lock_guard<std::mutex> lock(mu_);
    std::map<std::string, double> step;
    double loss = 0.0;
    const double k = static_cast<double>(cands.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
      std::vector<double> s;
      double peak = -1e300;
      for (const auto& c : cands) {
        double b = bias_.count(c) ? bias_.at(c) : 0.0;
        s.push_back(b + static_cast<double>(occurrences(texts[i], c)));
        peak = std::max(peak, s.back());
      }
      double z = 0.0;
      for (double v : s) z += std::exp(v - peak);
      for (std::size_t j = 0; j < cands.size(); ++j) {
        double p = std::exp(s[j] - peak) / z;
        double q = eps / k + (cands[j] == gold[i] ? 1.0 - eps : 0.0);
        loss -= q * std::log(p);
        step[cands[j]] += (q - p) / static_cast<double>(texts.size());
      }
    }
    for (const auto& [c, g] : step) bias_[c] += lr * g;
    reply(res, {{"loss", loss / static_cast<double>(texts.size())}});
  });
  srv.Post("/save", [=, this](const httplib::Request& req,
                              httplib::Response& res) {
    if (!gate(req, res)) return;
    std::lock_guard<std::mutex> lock(mu_);
    std::string id = "snap-" + std::to_string(snapshots_.size() + 1);
    snapshots_[id] = bias_;
    reply(res, {{"checkpoint_id", id}});
  });
  srv.Post("/load", [=, this](const httplib::Request& req,
                              httplib::Response& res) {
    if (!gate(req, res)) return;
    std::string id = json::parse(req.body).at("checkpoint_id");
    std::lock_guard<std::mutex> lock(mu_);
    auto it = snapshots_.find(id);
    if (it == snapshots_.end()) return reject(res, "unknown checkpoint " + id);
    bias_ = it->second;
    reply(res, {{"checkpoint_id", id}});
  });

  port_ = srv.bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

FakeSidecar::~FakeSidecar() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string FakeSidecar::url() const {
  return "http://127.0.0.1:" + std::to_string(port_);
}

std::vector<std::string> FakeSidecar::requests() const {
  std::lock_guard<std::mutex> lock(mu_);
  return requests_;
}

std::string FakeSidecar::last_body(const std::string& path) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = bodies_.find(path);
  return it == bodies_.end() ? std::string() : it->second;
}

double FakeSidecar::bias(const std::string& word) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = bias_.find(word);
  return it == bias_.end() ? 0.0 : it->second;
}

std::string unused_local_url() {
  // Bind an ephemeral port, note it and release it: nothing listens there.
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return "http://127.0.0.1:" + std::to_string(ntohs(addr.sin_port));
}

}  // namespace pcp::testing
