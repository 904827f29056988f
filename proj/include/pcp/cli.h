#ifndef PCP_CLI_H_
#define PCP_CLI_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcp/corpus.h"
#include "pcp/reference_scorer.h"
#include "pcp/remote_scorer.h"
#include "pcp/sense.h"
#include "pcp/train.h"

namespace pcp {

enum class Mode { kPcp, kPidrp, kPedrr };

std::string mode_name(Mode mode);
Mode parse_mode(std::string_view name);

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitBackend = 4;

// Maps an error raised by the toolkit onto the exit codes above.
int exit_code_for(const std::exception& error);

struct DataConfig {
  std::string format = "normalized";  // normalized | conll16
  // Either one corpus split by section, or explicit per-split files.
  std::string corpus;
  std::string train;
  std::string dev;
  std::string test;
};

struct ScorerConfig {
  std::string kind = "reference";  // mock | reference | remote
  ReferenceScorerConfig reference;
  RemoteEndpoint remote;
  std::map<std::string, double> mock_scores;
  double mock_default_score = 0.0;
};

// One experiment, read from a JSON file (comments allowed). Relative paths
// resolve against the directory holding the file.
struct ExperimentConfig {
  Mode mode = Mode::kPcp;
  Dataset dataset = Dataset::kPdtb;
  std::optional<SchemeId> scheme;  // defaults to the verbalizer's scheme
  DataConfig data;
  std::string template_id;  // defaults per mode: T6, PIDRP, PEDRR
  std::string template_file;
  std::string verbalizer;   // builtin id or path; defaults per mode
  ScorerConfig scorer;
  TrainConfig train;
  bool restrict_to_answers = true;
  std::string output_dir = "pcp-out";
  std::filesystem::path base_dir = ".";

  std::string effective_template_id() const;
  std::string effective_verbalizer() const;
  std::filesystem::path resolve(const std::string& path) const;

  // Canonical, key-ordered JSON of every setting (the config echo).
  std::string echo() const;
};

// Throws ConfigError listing every problem found (unknown keys, wrong
// types, out-of-range values).
ExperimentConfig parse_experiment_config(
    std::string_view text, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Runs one subcommand in-process; `args` excludes the program name.
// Subcommands: ingest, train, eval, predict, case-study, template-search,
// validate-verbalizer, induce-verbalizer.
int run(const std::vector<std::string>& args, std::istream& in,
        std::ostream& out, std::ostream& err);

}  // namespace pcp

#endif  // PCP_CLI_H_
