#ifndef PCP_REMOTE_SCORER_H_
#define PCP_REMOTE_SCORER_H_

#include <mutex>
#include <string>

#include "pcp/scorer.h"

namespace pcp {

inline constexpr const char* kSidecarProtocolVersion = "v1";
inline constexpr const char* kSidecarEnvVar = "PCP_SIDECAR_URL";

struct RemoteEndpoint {
  std::string url = "http://127.0.0.1:8765";
  int timeout_ms = 30000;
  int retries = 2;  // extra attempts after the first failure
};

struct SidecarInfo {
  std::string version;
  std::string model_name;
  std::string mask_token;
  std::string sep_token;
  bool trainable = false;
};

// Client for the masked-LM sidecar (JSON over HTTP). Construction performs the
// /health handshake: BackendUnavailable when unreachable after the retries,
// HandshakeError on a protocol version mismatch.
class RemoteScorer : public Scorer {
 public:
  explicit RemoteScorer(RemoteEndpoint endpoint);

  const SidecarInfo& info() const { return info_; }

  ScorerCapabilities capabilities() const override;
  // Mask spelling from /health; the segment marker is the sep token twice.
  Placeholders placeholders() const override;
  // Coarse whitespace tokenization that isolates the mask token; the sidecar
  // performs the real tokenization.
  std::vector<std::string> tokenize(std::string_view text) const override;
  std::vector<bool> single_token(
      std::span<const std::string> words) const override;
  ScoreVector score_mask(
      const RenderedPrompt& prompt,
      std::span<const std::string> candidates) const override;
  std::vector<ScoreVector> score_batch(
      std::span<const RenderedPrompt> prompts,
      std::span<const std::string> candidates) const override;
  double train_step(std::span<const TrainingExample> batch,
                    std::span<const std::string> candidates,
                    const StepOptions& options) override;
  std::string save_checkpoint() override;
  void load_checkpoint(const std::string& id) override;

 private:
  std::string post(const std::string& path, const std::string& body) const;
  std::string get(const std::string& path) const;

  RemoteEndpoint endpoint_;
  SidecarInfo info_;
  std::mutex train_mu_;
};

}  // namespace pcp

#endif  // PCP_REMOTE_SCORER_H_
