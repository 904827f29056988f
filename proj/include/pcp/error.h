#ifndef PCP_ERROR_H_
#define PCP_ERROR_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace pcp {

// Base class for every error raised by the toolkit. The CLI maps the
// subclasses below onto exit codes (see cli.h).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (bad JSON, bad template pattern, ...). `line` is
// 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates the record schema.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, std::string field, const std::string& what)
      : Error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
              "field '" + field + "': " + what),
        line_(line),
        field_(std::move(field)) {}
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A caller broke an interface precondition (mask count, candidate set, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class SchemeError : public Error {
 public:
  using Error::Error;
};

class UnmappedAnswerError : public Error {
 public:
  explicit UnmappedAnswerError(std::string word)
      : Error("answer word '" + word + "' is not in any answer set"),
        word_(std::move(word)) {}
  const std::string& word() const { return word_; }

 private:
  std::string word_;
};

class InductionError : public Error {
 public:
  explicit InductionError(std::string label)
      : Error("no answer candidates survive for label '" + label + "'"),
        label_(std::move(label)) {}
  const std::string& label() const { return label_; }

 private:
  std::string label_;
};

// Operation not supported by this scorer (e.g. training a mock).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class BackendUnavailable : public Error {
 public:
  BackendUnavailable(int attempts, const std::string& what)
      : Error("backend unavailable after " + std::to_string(attempts) +
              " attempt(s): " + what),
        attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

class HandshakeError : public Error {
 public:
  using Error::Error;
};

// Configuration problems, reported all at once.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error(Join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string Join(const std::vector<std::string>& v) {
    std::string out = "invalid configuration:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcp

#endif  // PCP_ERROR_H_
