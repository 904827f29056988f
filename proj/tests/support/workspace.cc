#include "support/workspace.h"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pcp/cli.h"
#include "pcp/corpus.h"

namespace pcp::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "pcp-test-XXXXXX").string();
  if (mkdtemp(tmpl.data()) == nullptr) {
    throw std::runtime_error("mkdtemp failed for " + tmpl);
  }
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path write_synthetic_experiment(const fs::path& dir,
                                    const SyntheticOptions& options,
                                    const std::string& extra) {
  std::ostringstream corpus;
  auto instances = synthetic_corpus(options);
  write_normalized(corpus, instances);
  write_text_file(dir / "corpus.jsonl", corpus.str());
  std::string config =
      "{\n"
      "  // synthetic keyword corpus\n"
      "  \"mode\": \"pcp\",\n"
      "  \"dataset\": \"pdtb\",\n"
      "  \"scheme\": \"PdtbSecond11\",\n"
      "  \"data\": {\"corpus\": \"corpus.jsonl\"},\n"
      "  \"template\": \"T6\",\n"
      "  \"verbalizer\": \"pdtb-second\",\n"
      "  \"scorer\": {\"kind\": \"reference\"},\n"
      "  \"output_dir\": \"out\"" +
      (extra.empty() ? std::string() : ",\n  " + extra) + "\n}\n";
  fs::path path = dir / "config.json";
  write_text_file(path, config);
  return path;
}

CliResult run_cli(const std::vector<std::string>& args,
                  const std::string& stdin_text) {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  CliResult r;
  r.code = run(args, in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace pcp::testing
